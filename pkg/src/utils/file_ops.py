# src/utils/file_ops.py
# !/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : file_ops.py
# @Software: Cursor
# @Description: 原子写文件
import os
import tempfile

from contextlib import contextmanager
from typing import IO, Iterator


@contextmanager
def atomic_open(path: str | os.PathLike, mode: str = 'wb', encoding: str | None = None) -> Iterator[IO]:
    """
    先写同目录临时文件, 成功后 rename 覆盖目标

    块内抛出异常时删除临时文件, 目标保持原样。
    """
    path = os.fspath(path)
    directory = os.path.dirname(path) or '.'
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, encoding=encoding) as fh:
            yield fh
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def atomic_write_bytes(path: str | os.PathLike, payload: bytes) -> None:
    with atomic_open(path, 'wb') as fh:
        fh.write(payload)


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    with atomic_open(path, 'w', encoding='utf-8') as fh:
        fh.write(text)
