#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : cache.py
# @Software: Cursor
# @Description: 片段特征缓存
import os

from src.common.dataclasses import Clip, FeatureMap
from src.dataset.audio import read_wav
from src.features.cache import read_feature_cache, write_feature_cache
from src.features.config import FeatureConfig
from src.features.extract import extract

CACHE_SUFFIX = '.scnf'


def cache_roundtrip(feature: FeatureMap, path: str | os.PathLike) -> FeatureMap:
    """写入后立即读回"""
    write_feature_cache(feature, path)
    return read_feature_cache(path)


def cache_path(cache_dir: str | os.PathLike, clip_id: str) -> str:
    return os.path.join(os.fspath(cache_dir), f'{clip_id}{CACHE_SUFFIX}')


def load_or_extract(clip: Clip, config: FeatureConfig, cache_dir: str | os.PathLike) -> FeatureMap:
    """
    命中缓存直接读取, 否则读 WAV 提取特征并写入缓存

    metadata 附带片段 id、场景、城市与来源。
    """
    path = cache_path(cache_dir, clip.id)
    if os.path.exists(path):
        return read_feature_cache(path)
    samples, sample_rate = read_wav(clip.path)
    feature = extract(samples, sample_rate, config)
    feature.metadata.update(
        {'clip_id': clip.id, 'scene': clip.scene, 'city': clip.city, 'provenance': clip.provenance.value}
    )
    write_feature_cache(feature, path)
    return feature
