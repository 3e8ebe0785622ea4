#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : io.py
# @Software: Cursor
# @Description: 预测文件读写
"""
逗号分隔, 首行为表头 clip_id,<场景名...>, 之后每行一个片段的概率向量

浮点数按 repr 写出, 读回后逐位一致。
"""
import csv
import os

from typing import Sequence

import numpy as np

from src.common.dataclasses import PredictionRecord
from src.core.exceptions import errors
from src.utils.file_ops import atomic_open

ID_COLUMN = 'clip_id'


def write_predictions(records: Sequence[PredictionRecord], path: str | os.PathLike, label_set: Sequence[str]) -> None:
    with atomic_open(path, 'w', encoding='utf-8') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow([ID_COLUMN, *label_set])
        for record in records:
            if len(record.probs) != len(label_set):
                raise errors.ShapeError(msg='概率向量长度与场景数不一致', data=f'{record.clip_id}: {len(record.probs)}')
            writer.writerow([record.clip_id, *(repr(float(p)) for p in record.probs)])


def read_predictions(
    path: str | os.PathLike, classifier_id: str | None = None, label_set: Sequence[str] | None = None
) -> list[PredictionRecord]:
    """
    :param classifier_id: 默认取文件名 (去掉扩展名)
    :param label_set: 给出时校验表头
    """
    classifier_id = classifier_id or os.path.splitext(os.path.basename(path))[0]
    try:
        with open(path, encoding='utf-8', newline='') as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as e:
        raise errors.IngestionError(msg='无法读取预测文件', data=str(path)) from e
    if not rows or rows[0][:1] != [ID_COLUMN]:
        raise errors.CorruptionError(msg='预测文件缺少表头', data=str(path))
    header = rows[0][1:]
    if label_set is not None and header != list(label_set):
        raise errors.AlignmentError(msg='预测文件的场景表不一致', data=f'{path}: {header}')
    records = []
    for number, row in enumerate(rows[1:], start=2):
        if len(row) != len(header) + 1:
            raise errors.CorruptionError(msg='预测行列数错误', data=f'{path}:{number}')
        try:
            probs = np.asarray([float(v) for v in row[1:]], dtype=np.float64)
        except ValueError as e:
            raise errors.CorruptionError(msg='预测行含非数值', data=f'{path}:{number}') from e
        records.append(PredictionRecord(clip_id=row[0], probs=probs, classifier_id=classifier_id))
    return records
