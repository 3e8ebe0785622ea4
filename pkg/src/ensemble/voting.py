#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : voting.py
# @Software: Cursor
# @Description: 概率平均 / 加权投票
from typing import Sequence

import numpy as np

from src.common.dataclasses import PredictionRecord
from src.core.exceptions import errors

PredictionSet = Sequence[PredictionRecord]

# 行和偏离 1 超过该值才重新归一化
RENORMALIZE_TOLERANCE = 1e-12


def align(members: Sequence[PredictionSet], clip_ids: Sequence[str] | None = None) -> tuple[list[str], np.ndarray]:
    """
    按片段 id 对齐各成员的预测

    :param clip_ids: 输出顺序, 默认第一个成员的顺序
    :return: (片段 id, 概率数组 members × clips × classes)
    """
    if not members:
        raise errors.ConfigError(msg='融合至少需要一个成员')
    tables = []
    for k, records in enumerate(members):
        table = {r.clip_id: r.probs for r in records}
        if len(table) != len(records):
            raise errors.AlignmentError(msg='成员内片段 id 重复', data=f'member={k}')
        tables.append(table)
    order = list(clip_ids) if clip_ids is not None else [r.clip_id for r in members[0]]
    for k, table in enumerate(tables):
        if clip_ids is None and set(table) != set(order):
            missing = sorted(set(order) ^ set(table))
            raise errors.AlignmentError(msg='成员覆盖的片段不一致', data=f'member={k}, 差异={missing[:5]}')
        absent = [c for c in order if c not in table]
        if absent:
            raise errors.AlignmentError(msg='成员缺少片段', data=f'member={k}, 缺少={absent[:5]}')
    widths = {len(r.probs) for records in members for r in records}
    if len(widths) > 1:
        raise errors.AlignmentError(msg='成员的类别数不一致', data=[str(w) for w in sorted(widths)])
    stack = np.stack([np.stack([np.asarray(t[c], dtype=np.float64) for c in order]) for t in tables])
    return order, stack


def _renormalize(fused: np.ndarray) -> np.ndarray:
    sums = fused.sum(axis=1, keepdims=True)
    off = np.abs(sums - 1.0) > RENORMALIZE_TOLERANCE
    if np.any(off):
        fused = np.where(off, fused / np.where(sums > 0, sums, 1.0), fused)
    return fused


def fuse_probs(stack: np.ndarray, weights: Sequence[float] | np.ndarray | None = None) -> np.ndarray:
    """
    stack: members × clips × classes

    weights 为 None 或全部相等时是算术平均。
    """
    if weights is None:
        return _renormalize(stack.mean(axis=0))
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (len(stack),):
        raise errors.ConfigError(msg='权重个数与成员个数不一致', data=f'weights={len(w)}, members={len(stack)}')
    if np.any(w < 0) or not w.sum() > 0:
        raise errors.ConfigError(msg='权重必须非负且和为正', data=[repr(float(x)) for x in w])
    if np.all(w == w[0]):
        return _renormalize(stack.mean(axis=0))
    w = w / w.sum()
    fused = np.zeros(stack.shape[1:], dtype=np.float64)
    for weight, probs in zip(w, stack):
        if weight:
            fused = fused + weight * probs
    return _renormalize(fused)


def _records(clip_ids: list[str], fused: np.ndarray, name: str) -> list[PredictionRecord]:
    return [PredictionRecord(clip_id=c, probs=p, classifier_id=name) for c, p in zip(clip_ids, fused)]


def average_vote(members: Sequence[PredictionSet], name: str = 'average') -> list[PredictionRecord]:
    """逐片段平均各成员的概率向量, argmax 即融合标签"""
    clip_ids, stack = align(members)
    return _records(clip_ids, fuse_probs(stack), name)


def weighted_vote(
    members: Sequence[PredictionSet], weights: Sequence[float], name: str = 'weighted'
) -> list[PredictionRecord]:
    """逐片段按权重平均概率向量; 权重按和归一化, 正数缩放不改变结果"""
    clip_ids, stack = align(members)
    return _records(clip_ids, fuse_probs(stack, weights), name)
