#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : stft.py
# @Software: Cursor
# @Description: 中心填充短时傅里叶变换
"""
分帧规则

帧数 = ceil(len / hop)。信号左侧填充 win // 2 个采样 (反射, 信号过短时补零),
右侧补足最后一帧所需长度。nfft 取不小于窗长的最小 2 的幂。
"""
import math

import numpy as np

from numpy.lib.stride_tricks import sliding_window_view
from scipy import fft, signal

from src.core.exceptions import errors


def next_pow2(n: int) -> int:
    """不小于 n 的最小 2 的幂"""
    return 1 << max(0, int(n - 1).bit_length())


def frame_count(n_samples: int, hop: int) -> int:
    """ceil(len / hop)"""
    return math.ceil(n_samples / hop)


def _pad(samples: np.ndarray, before: int, after: int) -> np.ndarray:
    mode = 'reflect' if before < len(samples) and after < len(samples) else 'constant'
    return np.pad(samples, (before, after), mode=mode)


def stft(
    samples: np.ndarray,
    win: int,
    hop: int,
    nfft: int | None = None,
    window: str = 'hamming',
) -> np.ndarray:
    """
    单声道幅度谱

    :param samples: 一维采样
    :param win: 窗长 (采样数)
    :param hop: 帧移 (采样数)
    :param nfft: FFT 点数, 默认 next_pow2(win)
    :return: (frames, nfft // 2 + 1)
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1:
        raise errors.InputError(msg='stft 只接受单声道', data=f'shape={samples.shape}')
    if samples.size == 0:
        raise errors.InputError(msg='空信号')
    if hop < 1 or win < hop:
        raise errors.ConfigError(msg='需要 win ≥ hop ≥ 1', data=f'win={win}, hop={hop}')
    nfft = nfft or next_pow2(win)
    n_frames = frame_count(samples.size, hop)
    left = win // 2
    right = max(0, (n_frames - 1) * hop + win - samples.size - left)
    padded = _pad(samples, left, right)
    frames = sliding_window_view(padded, win)[::hop][:n_frames]
    weights = signal.get_window(window, win, fftbins=True)
    return np.abs(fft.rfft(frames * weights, n=nfft, axis=-1))


def power_spectrogram(samples: np.ndarray, win: int, hop: int, window: str = 'hamming') -> np.ndarray:
    """功率谱 |X|²"""
    return stft(samples, win, hop, window=window) ** 2


def bin_frequencies(nfft: int, sample_rate: int) -> np.ndarray:
    """rfft 各频点的频率 (Hz)"""
    return fft.rfftfreq(nfft, d=1.0 / sample_rate)
