#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : transforms.py
# @Software: Cursor
# @Description: 声道编码与 delta 系数
import librosa
import numpy as np

from src.common.dataclasses import FeatureMap
from src.common.enums import ChannelMode
from src.core.conf import settings
from src.core.exceptions import errors


def _stereo_axis(value: np.ndarray | FeatureMap) -> tuple[np.ndarray, int]:
    """波形 (samples, 2) 的声道轴是 1, 特征图 (L, 2, n) 的声道轴也是 1"""
    data = value.data if isinstance(value, FeatureMap) else np.asarray(value)
    if data.ndim < 2 or data.shape[1] != 2:
        raise errors.InputError(msg='需要恰好 2 个声道', data=f'shape={data.shape}')
    return data, 1


def channel_transform(stereo: np.ndarray | FeatureMap, mode: ChannelMode) -> np.ndarray | FeatureMap:
    """
    声道编码

    left-right 为恒等; ave-diff 为 ((L + R) / 2, (L − R) / 2)
    """
    mode = ChannelMode(mode)
    if mode == ChannelMode.LEFT_RIGHT:
        if isinstance(stereo, FeatureMap):
            return stereo.replace(channel_mode=mode)
        return np.asarray(stereo)
    data, axis = _stereo_axis(stereo)
    left, right = np.take(data, 0, axis=axis), np.take(data, 1, axis=axis)
    encoded = np.stack([(left + right) / 2, (left - right) / 2], axis=axis)
    if isinstance(stereo, FeatureMap):
        return stereo.replace(data=encoded, channel_mode=mode)
    return encoded


def inverse_channel_transform(encoded: np.ndarray, mode: ChannelMode) -> np.ndarray:
    """ave-diff 逆变换: L = ave + diff, R = ave − diff"""
    if ChannelMode(mode) == ChannelMode.LEFT_RIGHT:
        return np.asarray(encoded)
    data, axis = _stereo_axis(encoded)
    ave, diff = np.take(data, 0, axis=axis), np.take(data, 1, axis=axis)
    return np.stack([ave + diff, ave - diff], axis=axis)


def delta(data: np.ndarray, width: int = settings.DELTA_WIDTH) -> np.ndarray:
    """
    沿帧轴 (axis 0) 的回归窗 delta, 边界复制

    d_t = Σ_{k=1..N} k·(x_{t+k} − x_{t−k}) / (2·Σ k²), 即 2N + 1 点一阶 Savitzky-Golay 导数
    """
    return librosa.feature.delta(np.asarray(data, dtype=np.float64), width=2 * width + 1, order=1, axis=0,
                                 mode='nearest')


def deltas(feat: FeatureMap, order: int = 2, width: int = settings.DELTA_WIDTH) -> FeatureMap:
    """
    在通道轴上堆叠 [static, Δ, ΔΔ]

    :param feat: L × c × n
    :param order: 1 或 2
    :param width: 回归窗半宽
    :return: L × (order + 1)·c × n
    """
    if order not in (1, 2):
        raise errors.ConfigError(msg='delta 阶数只能是 1 或 2', data=f'order={order}')
    if feat.frames < 2 * width + 1:
        raise errors.InputError(msg='帧数不足以计算 delta', data=f'L={feat.frames}, 需要 ≥ {2 * width + 1}')
    stacked = [feat.data.astype(np.float64)]
    for _ in range(order):
        stacked.append(delta(stacked[-1], width))
    data = np.concatenate(stacked, axis=1).astype(feat.data.dtype)
    metadata = {**feat.metadata, 'delta_order': str(order)}
    return feat.replace(data=data, metadata=metadata)
