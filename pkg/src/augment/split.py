#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : split.py
# @Software: Cursor
# @Description: 按录制城市把训练集分成两半
import itertools

from typing import Mapping

import numpy as np

from src.core.conf import settings
from src.core.exceptions import errors
from src.training.data import LabeledFeatures


def _exhaustive(sizes: Mapping[int, int], rng: np.random.Generator) -> set[int]:
    """枚举所有二分, 最优解不唯一时随机取一个"""
    cities = sorted(sizes)
    total = sum(sizes.values())
    best, candidates = None, []
    first, rest = cities[0], cities[1:]
    # 固定第一个城市在 A 组, 避免对称重复
    for r in range(len(rest)):
        for combo in itertools.combinations(rest, r):
            group = {first, *combo}
            gap = abs(total - 2 * sum(sizes[c] for c in group))
            if best is None or gap < best:
                best, candidates = gap, [group]
            elif gap == best:
                candidates.append(group)
    return candidates[int(rng.integers(len(candidates)))]


def _greedy(sizes: Mapping[int, int], rng: np.random.Generator) -> set[int]:
    """按片段数从大到小依次放入较小的一组"""
    cities = list(rng.permutation(sorted(sizes)))
    cities.sort(key=lambda c: -sizes[c])
    group, other, load_a, load_b = set(), set(), 0, 0
    for city in cities:
        if load_a <= load_b:
            group.add(int(city))
            load_a += sizes[city]
        else:
            other.add(int(city))
            load_b += sizes[city]
    return group


def partition_cities(
    sizes: Mapping[int, int], rng: np.random.Generator, exhaustive_max: int = settings.CITY_SPLIT_EXHAUSTIVE_MAX
) -> tuple[set[int], set[int]]:
    """
    城市二分, 使两组片段数之差最小

    :param sizes: 城市 -> 片段数
    :return: (A 组城市, B 组城市), 两组都非空
    """
    if len(sizes) < 2:
        raise errors.SplitError(msg='按城市划分至少需要 2 个城市', data=f'cities={sorted(sizes)}')
    group = _exhaustive(sizes, rng) if len(sizes) <= exhaustive_max else _greedy(sizes, rng)
    return group, set(sizes) - group


def city_split(
    data: LabeledFeatures, rng: np.random.Generator, exhaustive_max: int = settings.CITY_SPLIT_EXHAUSTIVE_MAX
) -> tuple[LabeledFeatures, LabeledFeatures]:
    """
    按城市分成片段数接近的 sub-train 与 sub-test, 同一城市的片段只落在一侧

    哪一组作为 sub-train 由 rng 决定。
    """
    if data.cities is None:
        raise errors.SplitError(msg='数据集缺少城市标签')
    values, counts = np.unique(data.cities, return_counts=True)
    group_a, group_b = partition_cities(dict(zip(values.tolist(), counts.tolist())), rng, exhaustive_max)
    if rng.random() < 0.5:
        group_a, group_b = group_b, group_a
    train_mask = np.isin(data.cities, sorted(group_a))
    return data.subset(np.flatnonzero(train_mask)), data.subset(np.flatnonzero(~train_mask))
