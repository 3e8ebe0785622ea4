# src/utils/rng.py
# !/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : rng.py
# @Software: Cursor
# @Description: 可复现的随机数流
import zlib

import numpy as np


def named_rng(seed: int, name: str) -> np.random.Generator:
    """
    由 (seed, name) 派生独立随机流

    同一 seed 下每个层/阶段的随机流互不影响, 增删其他层不会改变已有层的初始化。
    """
    return np.random.default_rng([int(seed), zlib.crc32(name.encode('utf-8'))])


def child_seed(rng: np.random.Generator) -> int:
    """从父随机流抽取一个子 seed"""
    return int(rng.integers(0, 2**31 - 1))
