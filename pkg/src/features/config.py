#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : config.py
# @Software: Cursor
# @Description: 特征提取配置
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator

from src.common.enums import ChannelMode, FeatureKind
from src.core.conf import settings


class FeatureConfig(BaseModel):
    """特征提取配置, 未给出的分帧参数按特征类型取默认值"""
    model_config = ConfigDict(validate_default=True)

    kind: FeatureKind = FeatureKind.FBANK
    channel_mode: ChannelMode = ChannelMode.LEFT_RIGHT
    sample_rate: int = Field(default=settings.SAMPLE_RATE, gt=0)
    win_ms: float | None = None
    hop_ms: float | None = None
    n_filters: int | None = None
    delta_order: int | None = None
    delta_width: int = Field(default=settings.DELTA_WIDTH, ge=1)
    log_floor: float = Field(default=settings.LOG_FLOOR, gt=0)
    linear_spacing_hz: float = Field(default=settings.SCALOGRAM_LINEAR_SPACING_HZ, gt=0)
    min_duration_s: float = Field(default=settings.FEATURE_MIN_DURATION_S, ge=0)

    @field_validator('win_ms', 'hop_ms', 'n_filters', 'delta_order')
    @classmethod
    def fill_kind_default(cls, v: float | int | None, info: ValidationInfo) -> float | int:
        """按特征类型补全默认值"""
        if v is not None:
            return v
        fbank = info.data.get('kind', FeatureKind.FBANK) == FeatureKind.FBANK
        defaults = {
            'win_ms': settings.FBANK_WIN_MS if fbank else settings.SCALOGRAM_WIN_MS,
            'hop_ms': settings.FBANK_HOP_MS if fbank else settings.SCALOGRAM_HOP_MS,
            'n_filters': settings.FBANK_N_FILTERS if fbank else settings.SCALOGRAM_N_FILTERS,
            'delta_order': settings.FBANK_DELTA_ORDER if fbank else 0,
        }
        return defaults[info.field_name]  # type: ignore[index]

    @field_validator('hop_ms')
    @classmethod
    def validate_hop(cls, v: float, info: ValidationInfo) -> float:
        """win_ms ≥ hop_ms > 0"""
        win = info.data.get('win_ms')
        if v <= 0 or (win is not None and win < v):
            raise ValueError(f'需要 win_ms ≥ hop_ms > 0, 得到 win={win}, hop={v}')
        return v

    @field_validator('n_filters')
    @classmethod
    def validate_filters(cls, v: int) -> int:
        if v < 2:
            raise ValueError('滤波器数量至少为 2')
        return v

    @field_validator('delta_order')
    @classmethod
    def validate_delta_order(cls, v: int) -> int:
        if v not in (0, 1, 2):
            raise ValueError('delta 阶数只能是 0, 1, 2')
        return v

    @property
    def win_samples(self) -> int:
        return int(round(self.win_ms * self.sample_rate / 1000))  # type: ignore[operator]

    @property
    def hop_samples(self) -> int:
        return max(1, int(round(self.hop_ms * self.sample_rate / 1000)))  # type: ignore[operator]
