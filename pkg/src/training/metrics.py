#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : metrics.py
# @Software: Cursor
# @Description: 准确率与混淆矩阵
from typing import Sequence

import numpy as np

from src.common.dataclasses import PredictionRecord
from src.core.exceptions import errors


def confusion_matrix(true: np.ndarray, predicted: np.ndarray, n_classes: int) -> np.ndarray:
    """行: 真实类别, 列: 预测类别"""
    true, predicted = np.asarray(true, dtype=np.int64), np.asarray(predicted, dtype=np.int64)
    if true.shape != predicted.shape:
        raise errors.ShapeError(msg='真实标签与预测数量不一致', data=f'{true.shape} vs {predicted.shape}')
    matrix = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(matrix, (true, predicted), 1)
    return matrix


def accuracy(confusion: np.ndarray) -> float:
    total = confusion.sum()
    return float(np.trace(confusion) / total) if total else 0.0


def record_accuracy(records: Sequence[PredictionRecord], labels: dict[str, int]) -> float | None:
    """
    按片段 id 对齐后的准确率

    :param labels: 片段 id -> 场景下标
    :return: 没有任何带标签片段时返回 None
    """
    scored = [(labels[r.clip_id], r.label) for r in records if r.clip_id in labels]
    if not scored:
        return None
    return float(np.mean([t == p for t, p in scored]))
