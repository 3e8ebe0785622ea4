#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : __init__.py
# @Software: Cursor
# @Description: 音频特征前端
from src.features.cache import decode_feature, encode_feature, read_feature_cache, write_feature_cache
from src.features.config import FeatureConfig
from src.features.extract import extract, extract_fbank, extract_scalogram
from src.features.filterbank import FilterBank, mel_filterbank, wavelet_filterbank
from src.features.stft import frame_count, stft
from src.features.transforms import channel_transform, delta, deltas, inverse_channel_transform

__all__ = [
    'FeatureConfig',
    'FilterBank',
    'channel_transform',
    'decode_feature',
    'delta',
    'deltas',
    'encode_feature',
    'extract',
    'extract_fbank',
    'extract_scalogram',
    'frame_count',
    'inverse_channel_transform',
    'mel_filterbank',
    'read_feature_cache',
    'stft',
    'wavelet_filterbank',
    'write_feature_cache',
]
