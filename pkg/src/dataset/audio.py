#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : audio.py
# @Software: Cursor
# @Description: WAV 读写
import os

import numpy as np
import soundfile as sf

from src.core.exceptions import errors
from src.utils.file_ops import atomic_open

PCM_SUBTYPES = {'PCM_16', 'PCM_24'}


def read_wav(path: str | os.PathLike) -> tuple[np.ndarray, int]:
    """
    读取 PCM WAV

    :return: (samples × channels 的 float64 数组, 采样率)
    """
    try:
        info = sf.info(os.fspath(path))
        if info.format != 'WAV' or info.subtype not in PCM_SUBTYPES:
            raise errors.IngestionError(msg='只支持 16/24 bit PCM WAV', data=f'{path}: {info.format}/{info.subtype}')
        samples, sample_rate = sf.read(os.fspath(path), dtype='float64', always_2d=True)
    except (RuntimeError, OSError) as e:
        raise errors.IngestionError(msg='无法读取音频', data=f'{path}: {e}') from e
    if samples.shape[0] == 0:
        raise errors.IngestionError(msg='音频为空', data=str(path))
    return samples, int(sample_rate)


def write_wav(path: str | os.PathLike, samples: np.ndarray, sample_rate: int, subtype: str = 'PCM_16') -> None:
    """原子写入 PCM WAV, 样本先截断到 [-1, 1]"""
    if subtype not in PCM_SUBTYPES:
        raise errors.ConfigError(msg='只支持 16/24 bit PCM', data=subtype)
    samples = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    try:
        with atomic_open(path, 'wb') as fh:
            sf.write(fh, samples, sample_rate, subtype=subtype, format='WAV')
    except (RuntimeError, OSError) as e:
        raise errors.IngestionError(msg='无法写入音频', data=f'{path}: {e}') from e


def duration_of(path: str | os.PathLike) -> float:
    try:
        return float(sf.info(os.fspath(path)).duration)
    except (RuntimeError, OSError) as e:
        raise errors.IngestionError(msg='无法读取音频信息', data=f'{path}: {e}') from e
