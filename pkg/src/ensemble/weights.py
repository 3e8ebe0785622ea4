#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : weights.py
# @Software: Cursor
# @Description: 在留出集上拟合融合权重
"""
单纯形网格上的坐标上升

起点为各顶点 (只用一个成员) 与均匀权重; 每一步尝试把 step 的权重从一个成员移给另一个成员,
只接受使留出集准确率严格提高的移动。所有起点走完后, 在达到最高准确率的权重中取离均匀权重最近的一个。
由于顶点本身被评估过, 结果不低于最好的单个成员。
"""
from typing import Mapping, Sequence

import numpy as np

from src.common.logger import log
from src.core.conf import settings
from src.core.exceptions import errors
from src.ensemble.voting import PredictionSet, align, fuse_probs


def _accuracy(stack: np.ndarray, labels: np.ndarray, weights: np.ndarray) -> float:
    return float(np.mean(np.argmax(fuse_probs(stack, weights), axis=1) == labels))


def _ascend(stack: np.ndarray, labels: np.ndarray, start: np.ndarray, step: float,
            visited: dict[tuple[float, ...], float]) -> None:
    def score(w: np.ndarray) -> float:
        key = tuple(np.round(w, 12))
        if key not in visited:
            visited[key] = _accuracy(stack, labels, w)
        return visited[key]

    current, best = start, score(start)
    k = len(start)
    improved = True
    while improved:
        improved = False
        for i in range(k):
            for j in range(k):
                if i == j or current[j] < step - 1e-12:
                    continue
                candidate = current.copy()
                candidate[i] += step
                candidate[j] = max(candidate[j] - step, 0.0)
                value = score(candidate)
                if value > best:
                    current, best, improved = candidate, value, True


def fit_weights(
    members: Sequence[PredictionSet],
    holdout_labels: Mapping[str, int],
    step: float = settings.ENSEMBLE_GRID_STEP,
) -> np.ndarray:
    """
    拟合加权投票的权重, 结果和为 1

    :param holdout_labels: 片段 id -> 真实类别下标, 须覆盖成员的全部片段
    """
    if len(members) < 2:
        raise errors.ConfigError(msg='拟合权重至少需要 2 个成员', data=f'members={len(members)}')
    if not 0 < step <= 0.5:
        raise errors.ConfigError(msg='网格步长必须在 (0, 0.5] 内', data=f'step={step}')
    clip_ids, stack = align(members)
    missing = [c for c in clip_ids if c not in holdout_labels]
    if missing:
        raise errors.AlignmentError(msg='留出集缺少标签', data=missing[:5])
    labels = np.asarray([holdout_labels[c] for c in clip_ids], dtype=np.int64)
    k = len(members)
    uniform = np.full(k, 1.0 / k)
    if len(np.unique(labels)) < 2:
        log.warning(f'留出集只有一个类别, 使用均匀权重 (clips={len(labels)})')
        return uniform

    visited: dict[tuple[float, ...], float] = {}
    for start in [*np.eye(k), uniform]:
        _ascend(stack, labels, start, step, visited)
    best = max(visited.values())
    ties = [np.asarray(w) for w, acc in visited.items() if acc == best]
    chosen = min(ties, key=lambda w: float(np.linalg.norm(w - uniform)))
    log.info(f'融合权重: {np.round(chosen, 4).tolist()}, 留出集准确率 {best:.4f}')
    return chosen / chosen.sum()
