#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : markers.py
# @Software: Cursor
# @Description: 阶段完成标记与输出目录锁
import os

from contextlib import contextmanager
from typing import Iterator

from src.common.enums import Stage
from src.common.logger import log
from src.core.exceptions import errors
from src.utils.file_ops import atomic_write_text

LOCK_NAME = '.lock'
MARKER_DIR = 'markers'


class StageMarkers:
    """
    <stage>.done 记录产出该阶段结果的配置摘要; <stage>.failed 记录失败原因

    摘要一致的已完成阶段在重跑时跳过。
    """

    def __init__(self, out_dir: str | os.PathLike) -> None:
        self.root = os.path.join(os.fspath(out_dir), MARKER_DIR)

    def _path(self, stage: Stage, suffix: str) -> str:
        return os.path.join(self.root, f'{stage.value}.{suffix}')

    def done_hash(self, stage: Stage) -> str | None:
        try:
            with open(self._path(stage, 'done'), encoding='utf-8') as fh:
                return fh.read().strip() or None
        except FileNotFoundError:
            return None

    def is_done(self, stage: Stage, config_hash: str) -> bool:
        return self.done_hash(stage) == config_hash

    def mark_done(self, stage: Stage, config_hash: str) -> None:
        failed = self._path(stage, 'failed')
        if os.path.exists(failed):
            os.remove(failed)
        atomic_write_text(self._path(stage, 'done'), config_hash + '\n')

    def mark_failed(self, stage: Stage, config_hash: str, error: BaseException) -> None:
        done = self._path(stage, 'done')
        if os.path.exists(done):
            os.remove(done)
        atomic_write_text(self._path(stage, 'failed'), f'{config_hash}\n{type(error).__name__}: {error}\n')

    def is_failed(self, stage: Stage) -> bool:
        return os.path.exists(self._path(stage, 'failed'))


@contextmanager
def output_lock(out_dir: str | os.PathLike) -> Iterator[str]:
    """独占输出目录; 锁文件已存在时拒绝运行"""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(os.fspath(out_dir), LOCK_NAME)
    try:
        fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError as e:
        raise errors.ContractError(msg='输出目录正被另一个流水线占用', data=path) from e
    try:
        os.write(fd, f'{os.getpid()}\n'.encode('utf-8'))
        os.close(fd)
        yield path
    finally:
        try:
            os.remove(path)
        except FileNotFoundError:
            log.warning(f'锁文件已被移除: {path}')
