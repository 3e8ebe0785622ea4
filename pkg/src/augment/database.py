#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : database.py
# @Software: Cursor
# @Description: 增强后的数据库: 真实数据 + 已接受的生成样本
import dataclasses

import numpy as np

from src.common.dataclasses import FeatureMap
from src.core.exceptions import errors
from src.training.data import LabeledFeatures
from src.utils.hashing import Sha256Digest


@dataclasses.dataclass(frozen=True)
class FakeSet:
    """一轮被接受的生成样本"""
    round_index: int
    maps: tuple[FeatureMap, ...]
    set_id: str = ''


@dataclasses.dataclass(frozen=True)
class AugmentedDatabase:
    """
    真实片段永远保留; 每个生成样本恰好属于一个被接受的轮次

    n_cities > 0 时生成样本按序号轮流分配城市下标, 供城市对抗分支使用。
    """
    real: LabeledFeatures
    label_set: tuple[str, ...]
    fake_sets: tuple[FakeSet, ...] = ()
    n_cities: int = 0

    def __post_init__(self) -> None:
        rounds = [s.round_index for s in self.fake_sets]
        if len(rounds) != len(set(rounds)):
            raise errors.ContractError(msg='同一轮的生成样本只能加入一次', data=[str(r) for r in rounds])

    @property
    def fake_count(self) -> int:
        return sum(len(s.maps) for s in self.fake_sets)

    @property
    def accepted_rounds(self) -> list[int]:
        return [s.round_index for s in self.fake_sets]

    def fake_features(self) -> LabeledFeatures | None:
        maps = [m for s in self.fake_sets for m in s.maps]
        if not maps:
            return None
        ids = [f'gen-r{s.round_index}-{i}' for s in self.fake_sets for i in range(len(s.maps))]
        fakes = LabeledFeatures.from_feature_maps(maps, [m.metadata['scene'] for m in maps], ids, self.label_set)
        if self.n_cities:
            fakes.cities = np.arange(len(maps)) % self.n_cities
        return fakes

    def all_features(self) -> LabeledFeatures:
        fakes = self.fake_features()
        return self.real if fakes is None else self.real.concat(fakes)

    def digest(self) -> str:
        """真实数据与生成样本的内容摘要"""
        parts = [Sha256Digest.of_array(self.real.features), Sha256Digest.of_ids(self.real.clip_ids),
                 Sha256Digest.of_array(self.real.labels)]
        for fake_set in self.fake_sets:
            parts.append(str(fake_set.round_index))
            parts.extend(Sha256Digest.of_array(m.data) for m in fake_set.maps)
        return Sha256Digest.digest('|'.join(parts))
