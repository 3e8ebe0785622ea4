# src/utils/hashing.py
# !/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : hashing.py
# @Software: Cursor
# @Description: 配置与数组摘要
import hashlib

from typing import Any

import msgspec
import numpy as np


class Sha256Digest:
    """SHA-256 摘要类"""

    @staticmethod
    def digest(plaintext: bytes | str) -> str:
        """
        SHA-256 摘要

        :param plaintext: 明文
        :return: 十六进制摘要
        """
        sha256 = hashlib.sha256()
        if not isinstance(plaintext, bytes):
            plaintext = str(plaintext).encode('utf-8')
        sha256.update(plaintext)
        return sha256.hexdigest()

    @classmethod
    def of_config(cls, config: Any) -> str:
        """
        任意可 JSON 化配置的稳定摘要 (键排序)

        :param config: dict / msgspec.Struct / pydantic 导出的 dict
        :return:
        """
        return cls.digest(msgspec.json.encode(config, order='sorted'))

    @classmethod
    def of_array(cls, array: np.ndarray) -> str:
        """数组内容 + 形状 + 精度的摘要"""
        array = np.ascontiguousarray(array)
        header = f'{array.dtype.str}:{array.shape}'.encode('utf-8')
        return cls.digest(header + array.tobytes())

    @classmethod
    def of_ids(cls, ids: list[str]) -> str:
        """片段 id 集合的摘要, 与顺序无关"""
        return cls.digest('\n'.join(sorted(ids)))
