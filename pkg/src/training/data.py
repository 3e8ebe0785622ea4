#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : data.py
# @Software: Cursor
# @Description: 带标签的特征集合、验证集划分与分批
import dataclasses

from typing import Iterator, Sequence

import numpy as np

from src.common.dataclasses import FeatureMap
from src.core.exceptions import errors
from src.models.network import Network


@dataclasses.dataclass
class LabeledFeatures:
    """
    片段级特征集合

    features 布局 (clips, L, c, n); labels 为场景下标; cities 为城市下标, 可缺省。
    """
    features: np.ndarray
    labels: np.ndarray
    clip_ids: list[str]
    cities: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.cities is not None:
            self.cities = np.asarray(self.cities, dtype=np.int64)
        n = len(self.features)
        sizes = {len(self.labels), len(self.clip_ids)} | ({len(self.cities)} if self.cities is not None else set())
        if sizes != {n}:
            raise errors.ShapeError(msg='特征/标签/片段 id 数量不一致', data=f'features={n}, others={sorted(sizes)}')

    def __len__(self) -> int:
        return len(self.features)

    def subset(self, index: np.ndarray | Sequence[int]) -> 'LabeledFeatures':
        index = np.asarray(index, dtype=np.int64)
        return LabeledFeatures(
            features=self.features[index],
            labels=self.labels[index],
            clip_ids=[self.clip_ids[i] for i in index],
            cities=None if self.cities is None else self.cities[index],
        )

    def concat(self, other: 'LabeledFeatures') -> 'LabeledFeatures':
        """拼接; 任一侧缺城市标签时结果不带城市"""
        cities = None
        if self.cities is not None and other.cities is not None:
            cities = np.concatenate([self.cities, other.cities])
        return LabeledFeatures(
            features=np.concatenate([self.features, other.features]),
            labels=np.concatenate([self.labels, other.labels]),
            clip_ids=self.clip_ids + other.clip_ids,
            cities=cities,
        )

    @classmethod
    def from_feature_maps(
        cls,
        maps: Sequence[FeatureMap],
        scenes: Sequence[str],
        clip_ids: Sequence[str],
        label_set: Sequence[str],
        cities: Sequence[str] | None = None,
        city_set: Sequence[str] | None = None,
    ) -> 'LabeledFeatures':
        if not maps:
            raise errors.InputError(msg='特征集合为空')
        shapes = {m.shape for m in maps}
        if len(shapes) != 1:
            raise errors.ShapeError(msg='特征图形状不一致', data=[str(s) for s in sorted(shapes)])
        unknown = sorted(set(scenes) - set(label_set))
        if unknown:
            raise errors.InputError(msg='未知的场景标签', data=unknown)
        label_index = {label: i for i, label in enumerate(label_set)}
        city_index = None
        if cities is not None:
            city_set = list(city_set) if city_set is not None else sorted(set(cities))
            lookup = {city: i for i, city in enumerate(city_set)}
            city_index = np.array([lookup[c] for c in cities])
        return cls(
            features=np.stack([m.data for m in maps]),
            labels=np.array([label_index[s] for s in scenes]),
            clip_ids=list(clip_ids),
            cities=city_index,
        )


def validation_split(
    labels: np.ndarray, cities: np.ndarray | None, fraction: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """
    按场景分层抽取验证集, 每个场景内按城市轮流抽取

    每个至少有 2 个片段的场景贡献 max(1, round(fraction·n)) 个且至少留 1 个在训练侧。

    :return: (train 下标, val 下标), 均升序
    """
    labels = np.asarray(labels)
    cities = np.zeros(len(labels), dtype=np.int64) if cities is None else np.asarray(cities)
    picked: list[int] = []
    for scene in np.unique(labels):
        members = np.flatnonzero(labels == scene)
        if len(members) < 2:
            continue
        want = min(max(1, int(round(fraction * len(members)))), len(members) - 1)
        pools = {int(c): list(rng.permutation(members[cities[members] == c])) for c in np.unique(cities[members])}
        order = [int(c) for c in rng.permutation(sorted(pools))]
        taken: list[int] = []
        while len(taken) < want:
            for city in order:
                if pools[city] and len(taken) < want:
                    taken.append(int(pools[city].pop()))
        picked.extend(taken)
    val = np.sort(np.array(picked, dtype=np.int64))
    train = np.setdiff1d(np.arange(len(labels)), val)
    return train, val


def iterate_batches(n: int, batch_size: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """
    打乱后分批

    末尾只剩 1 个样本时并入前一批 (train 模式 batchnorm 需要 batch ≥ 2)。
    """
    order = rng.permutation(n)
    starts = list(range(0, n, batch_size))
    if len(starts) > 1 and n - starts[-1] < 2:
        starts.pop()
    for i, start in enumerate(starts):
        stop = starts[i + 1] if i + 1 < len(starts) else n
        yield order[start:stop]


def network_inputs(net: Network, data: LabeledFeatures) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """逐帧网络把片段展开为帧, 标签与城市按帧重复"""
    if not net.frame_wise:
        return data.features, data.labels, data.cities
    clips, frames = data.features.shape[:2]
    x = data.features.reshape((clips * frames,) + data.features.shape[2:])
    cities = None if data.cities is None else np.repeat(data.cities, frames)
    return x, np.repeat(data.labels, frames), cities
