#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : extract.py
# @Software: Cursor
# @Description: FBank 与 scalogram 特征提取
from functools import lru_cache
from math import gcd

import numpy as np

from scipy import signal

from src.common.dataclasses import FeatureMap
from src.common.enums import ChannelMode, FeatureKind
from src.core.exceptions import errors
from src.features.config import FeatureConfig
from src.features.filterbank import FilterBank, mel_filterbank, wavelet_filterbank
from src.features.stft import next_pow2, power_spectrogram
from src.features.transforms import channel_transform, deltas


@lru_cache(maxsize=16)
def _filterbank(kind: FeatureKind, n_filters: int, nfft: int, sample_rate: int, spacing_hz: float) -> FilterBank:
    if kind == FeatureKind.FBANK:
        return mel_filterbank(n_filters, nfft, sample_rate)
    return wavelet_filterbank(n_filters, nfft, sample_rate, spacing_hz)


def prepare_audio(samples: np.ndarray, sample_rate: int, config: FeatureConfig) -> np.ndarray:
    """
    校验并统一音频: (samples, channels) float64, 采样率不一致时重采样

    单声道在 left-right 模式下复制为双声道; ave-diff 模式要求真实双声道。
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.ndim != 2 or samples.shape[0] == 0 or not np.all(np.isfinite(samples)):
        raise errors.IngestionError(msg='音频数据损坏', data=f'shape={samples.shape}')
    if samples.shape[1] == 1:
        if config.channel_mode != ChannelMode.LEFT_RIGHT:
            raise errors.InputError(msg='ave-diff 模式需要双声道输入')
        samples = np.repeat(samples, 2, axis=1)
    if samples.shape[1] != 2:
        raise errors.InputError(msg='只支持单声道或双声道', data=f'channels={samples.shape[1]}')
    if sample_rate != config.sample_rate:
        factor = gcd(int(sample_rate), config.sample_rate)
        samples = signal.resample_poly(samples, config.sample_rate // factor, int(sample_rate) // factor, axis=0)
    duration = samples.shape[0] / config.sample_rate
    if duration < config.min_duration_s:
        raise errors.InputError(msg='音频过短', data=f'{duration:.3f}s < {config.min_duration_s}s')
    return samples


def _log_filter_energies(samples: np.ndarray, config: FeatureConfig) -> np.ndarray:
    """逐声道: 功率谱 -> 滤波器组 -> 取对数, 输出 L × c × n"""
    win, hop = config.win_samples, config.hop_samples
    bank = _filterbank(config.kind, config.n_filters, next_pow2(win), config.sample_rate, config.linear_spacing_hz)
    planes = []
    for channel in range(samples.shape[1]):
        energies = bank.apply(power_spectrogram(samples[:, channel], win, hop))
        planes.append(np.log(np.maximum(energies, config.log_floor)))
    return np.stack(planes, axis=1)


def extract(samples: np.ndarray, sample_rate: int, config: FeatureConfig) -> FeatureMap:
    """
    按配置提取特征图

    声道编码先于分帧; FBank 在最后追加 delta 系数, scalogram 不追加。
    """
    samples = channel_transform(prepare_audio(samples, sample_rate, config), config.channel_mode)
    data = _log_filter_energies(samples, config).astype(np.float32)  # type: ignore[arg-type]
    feature = FeatureMap(
        data=data,
        hop_ms=config.hop_ms,  # type: ignore[arg-type]
        win_ms=config.win_ms,  # type: ignore[arg-type]
        channel_mode=config.channel_mode,
        feature_kind=config.kind,
        metadata={
            'feature': config.kind.value,
            'channel_mode': config.channel_mode.value,
            'sample_rate': str(config.sample_rate),
        },
    )
    if config.kind == FeatureKind.FBANK and config.delta_order:
        feature = deltas(feature, config.delta_order, config.delta_width)
    return feature


def extract_fbank(samples: np.ndarray, sample_rate: int, config: FeatureConfig | None = None) -> FeatureMap:
    """对数 Mel 能量 (+ delta)"""
    config = config or FeatureConfig(kind=FeatureKind.FBANK)
    if config.kind != FeatureKind.FBANK:
        raise errors.ConfigError(msg='extract_fbank 需要 fbank 配置', data=f'kind={config.kind}')
    return extract(samples, sample_rate, config)


def extract_scalogram(samples: np.ndarray, sample_rate: int, config: FeatureConfig | None = None) -> FeatureMap:
    """长窗谱上的小波滤波器组能量, 对数压缩"""
    config = config or FeatureConfig(kind=FeatureKind.SCALOGRAM)
    if config.kind != FeatureKind.SCALOGRAM:
        raise errors.ConfigError(msg='extract_scalogram 需要 scalogram 配置', data=f'kind={config.kind}')
    return extract(samples, sample_rate, config)
