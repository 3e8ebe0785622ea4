#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : filterbank.py
# @Software: Cursor
# @Description: Mel 与小波滤波器组
import dataclasses

import librosa
import numpy as np

from src.common.enums import FilterKind
from src.core.exceptions import errors
from src.features.stft import bin_frequencies


@dataclasses.dataclass(frozen=True)
class FilterBank:
    """
    滤波器组

    weights: n_filters × n_bins 非负矩阵, 每行峰值为 1
    centers: 各滤波器中心频率 (Hz), 严格递增且 ≤ Nyquist
    """
    weights: np.ndarray
    kind: FilterKind
    centers: np.ndarray

    def __post_init__(self) -> None:
        if np.any(self.weights < 0) or np.any(self.weights.sum(axis=1) <= 0):
            raise errors.ConfigError(msg=f'{self.kind} 滤波器组存在负值或空行')
        self.weights.setflags(write=False)
        self.centers.setflags(write=False)

    @property
    def n_filters(self) -> int:
        return self.weights.shape[0]

    def apply(self, power: np.ndarray) -> np.ndarray:
        """(frames, bins) 功率谱 -> (frames, n_filters) 能量"""
        return power @ self.weights.T


def _fill_empty_rows(weights: np.ndarray, centers: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """没有覆盖任何频点的滤波器退化为离中心最近的单个频点"""
    for row in np.flatnonzero(weights.sum(axis=1) <= 0):
        weights[row, int(np.argmin(np.abs(freqs - centers[row])))] = 1.0
    return weights


def mel_filterbank(n_filters: int, nfft: int, sample_rate: int) -> FilterBank:
    """
    HTK Mel 刻度三角滤波器, 覆盖 0..Nyquist, 每行按峰值归一化为 1

    :param n_filters: 滤波器数量
    :param nfft: FFT 点数
    :param sample_rate: 采样率
    :return:
    """
    n_bins = nfft // 2 + 1
    if n_filters < 2:
        raise errors.ConfigError(msg='Mel 滤波器数量至少为 2', data=f'n_filters={n_filters}')
    if n_filters > n_bins:
        raise errors.ConfigError(msg='Mel 滤波器数量超过频点数', data=f'n_filters={n_filters}, bins={n_bins}')
    nyquist = sample_rate / 2
    weights = librosa.filters.mel(
        sr=sample_rate, n_fft=nfft, n_mels=n_filters, fmin=0.0, fmax=nyquist, htk=True, norm=None, dtype=np.float64
    )
    centers = librosa.mel_frequencies(n_mels=n_filters + 2, fmin=0.0, fmax=nyquist, htk=True)[1:-1]
    weights = _fill_empty_rows(weights, centers, bin_frequencies(nfft, sample_rate))
    weights /= weights.max(axis=1, keepdims=True)
    return FilterBank(weights=weights, kind=FilterKind.MEL, centers=centers)


def wavelet_centers(n_filters: int, nyquist: float, spacing_hz: float) -> tuple[np.ndarray, int]:
    """
    低频线性、高频几何分布的中心频率

    线性段 k·Δ (k = 1..n_lin), 几何段 n_lin·Δ·r^j, r = (n_lin + 1) / n_lin,
    两段衔接处的间隔相等。n_lin 取使最高中心频率不超过 Nyquist 的最小值。

    :return: (centers, n_lin)
    """
    if n_filters < 2:
        raise errors.ConfigError(msg='小波滤波器数量至少为 2', data=f'n_filters={n_filters}')
    if n_filters * spacing_hz >= nyquist:
        spacing_hz = nyquist / (n_filters + 1)
        return spacing_hz * np.arange(1, n_filters + 1), n_filters
    for n_lin in range(1, n_filters + 1):
        ratio = (n_lin + 1) / n_lin
        top = n_lin * spacing_hz * ratio ** (n_filters - n_lin)
        if top <= nyquist:
            break
    linear = spacing_hz * np.arange(1, n_lin + 1)
    geometric = n_lin * spacing_hz * ratio ** np.arange(1, n_filters - n_lin + 1)
    return np.concatenate([linear, geometric]), n_lin


def wavelet_filterbank(n_filters: int, nfft: int, sample_rate: int, spacing_hz: float = 20.0) -> FilterBank:
    """
    小波形状滤波器组: 高斯频响, 带宽与相邻中心间隔成正比 (几何段即恒 Q)

    :param n_filters: 滤波器数量
    :param nfft: FFT 点数
    :param sample_rate: 采样率
    :param spacing_hz: 线性段间隔
    :return:
    """
    nyquist = sample_rate / 2
    centers, _ = wavelet_centers(n_filters, nyquist, spacing_hz)
    bandwidth = np.diff(np.concatenate([[0.0], centers]))
    freqs = bin_frequencies(nfft, sample_rate)
    offsets = (freqs[None, :] - centers[:, None]) / bandwidth[:, None]
    weights = np.where(np.abs(offsets) <= 3.0, np.exp(-0.5 * offsets ** 2), 0.0)
    weights = _fill_empty_rows(weights, centers, freqs)
    weights /= weights.max(axis=1, keepdims=True)
    return FilterBank(weights=weights, kind=FilterKind.WAVELET, centers=centers)
