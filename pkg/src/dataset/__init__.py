#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : __init__.py
# @Software: Cursor
# @Description: 数据读取、合成数据集与特征缓存
from src.dataset.audio import read_wav, write_wav
from src.dataset.cache import cache_path, cache_roundtrip, load_or_extract
from src.dataset.manifest import DatasetManifest, city_of, parse_manifest, write_manifest
from src.dataset.mini import MINI_CITIES, make_mini_dataset

__all__ = [
    'DatasetManifest',
    'MINI_CITIES',
    'cache_path',
    'cache_roundtrip',
    'city_of',
    'load_or_extract',
    'make_mini_dataset',
    'parse_manifest',
    'read_wav',
    'write_manifest',
    'write_wav',
]
