#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : manifest.py
# @Software: Cursor
# @Description: DCASE 风格的数据清单
"""
清单格式

UTF-8, 制表符分隔, 表头可选 (首列为 filename 时视为表头)。每行:

    相对路径 <TAB> 场景标签 [<TAB> fold]

fold 取 train / evaluate, 缺省为 train。城市取文件名 (去扩展名) 按连字符切分后的第二段,
例如 audio/airport-barcelona-0-a.wav -> barcelona。
"""
import dataclasses
import os

from typing import Sequence

from src.common.dataclasses import Clip
from src.common.enums import Fold
from src.common.logger import log
from src.core.conf import settings
from src.core.exceptions import errors
from src.dataset.audio import duration_of
from src.utils.file_ops import atomic_write_text

HEADER = ('filename', 'scene_label', 'fold')


@dataclasses.dataclass
class DatasetManifest:
    clips: list[Clip]
    label_set: list[str]
    root: str = ''
    # 无法解析的行: "行号: 原因"
    diagnostics: list[str] = dataclasses.field(default_factory=list)

    def fold(self, fold: Fold) -> list[Clip]:
        return [clip for clip in self.clips if (clip.fold or Fold.TRAIN) == fold]

    @property
    def cities(self) -> list[str]:
        return sorted({clip.city for clip in self.clips})

    def by_id(self) -> dict[str, Clip]:
        return {clip.id: clip for clip in self.clips}

    def label_index(self, scene: str) -> int:
        return self.label_set.index(scene)


def clip_id_of(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def city_of(path: str) -> str:
    """文件名第二个连字符字段"""
    tokens = clip_id_of(path).split('-')
    if len(tokens) < 2 or not tokens[1]:
        raise ValueError(f'文件名中没有城市字段: {path}')
    return tokens[1]


def parse_manifest(
    path: str | os.PathLike,
    label_set: Sequence[str] | None = None,
    check_audio: bool = False,
) -> DatasetManifest:
    """
    解析清单, 格式错误的行记录到 diagnostics 而不中断

    :param label_set: 允许的场景标签, 默认全局场景表
    :param check_audio: 为 True 时读取每个文件的时长, 读不到的文件记为诊断
    """
    label_set = list(label_set or settings.SCENE_LABELS)
    try:
        with open(path, encoding='utf-8') as fh:
            lines = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise errors.IngestionError(msg='无法读取清单', data=str(path)) from e

    root = os.path.dirname(os.path.abspath(path))
    clips: list[Clip] = []
    diagnostics: list[str] = []
    seen: set[str] = set()
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = line.split('\t')
        if number == 1 and fields[0].strip() == HEADER[0]:
            continue
        try:
            if len(fields) < 2 or len(fields) > 3:
                raise ValueError(f'需要 2 或 3 列, 得到 {len(fields)} 列')
            rel_path, scene = fields[0].strip(), fields[1].strip()
            if scene not in label_set:
                raise ValueError(f'未知的场景标签 {scene!r}')
            fold = Fold(fields[2].strip()) if len(fields) == 3 else Fold.TRAIN
            clip_id = clip_id_of(rel_path)
            if clip_id in seen:
                raise ValueError(f'重复的片段 {clip_id}')
            full_path = os.path.join(root, rel_path)
            clip = Clip(id=clip_id, path=full_path, scene=scene, city=city_of(rel_path), fold=fold)
            if check_audio:
                clip.duration = duration_of(full_path)
        except (ValueError, errors.IngestionError) as e:
            diagnostics.append(f'{number}: {e}')
            continue
        seen.add(clip.id)
        clips.append(clip)

    for item in diagnostics:
        log.warning(f'清单 {path} 第 {item}')
    if not clips:
        raise errors.IngestionError(msg='清单中没有有效的行', data={'path': str(path), 'diagnostics': diagnostics})
    return DatasetManifest(clips=clips, label_set=label_set, root=root, diagnostics=diagnostics)


def write_manifest(manifest: DatasetManifest, path: str | os.PathLike) -> None:
    root = os.path.dirname(os.path.abspath(path))
    rows = ['\t'.join(HEADER)]
    for clip in manifest.clips:
        rel_path = os.path.relpath(clip.path, root).replace(os.sep, '/')
        rows.append('\t'.join((rel_path, clip.scene, (clip.fold or Fold.TRAIN).value)))
    atomic_write_text(path, '\n'.join(rows) + '\n')
