#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : config.py
# @Software: Cursor
# @Description: GAN 配置
from pydantic import BaseModel, Field, field_validator

from src.common.enums import GanMode
from src.core.conf import settings


class LossWeights(BaseModel):
    """损失权重: ACGAN 用 gamma, CVAE/ACGAN 用 gamma1..3"""
    gamma: float = Field(default=settings.GAN_GAMMA, ge=0.0)
    gamma1: float = Field(default=settings.GAN_GAMMA1, ge=0.0)
    gamma2: float = Field(default=settings.GAN_GAMMA2, ge=0.0)
    gamma3: float = Field(default=settings.GAN_GAMMA3, ge=0.0)


class GanConfig(BaseModel):
    mode: GanMode = GanMode.ACGAN
    noise_dim: int = Field(default=settings.GAN_NOISE_DIM, ge=1)
    width: int = Field(default=settings.GAN_WIDTH, ge=1)
    hidden: int = Field(default=settings.GAN_HIDDEN, ge=1)
    embed_dim: int = Field(default=settings.GAN_EMBED_DIM, ge=1)
    # 重建损失使用的判别器特征层, 负数从末尾计
    feature_layer: int = -1
    epochs: int = Field(default=settings.GAN_EPOCHS, ge=1)
    snapshot_epochs: list[int] = Field(default_factory=lambda: list(settings.GAN_SNAPSHOT_EPOCHS))
    batch_size: int = Field(default=settings.GAN_BATCH_SIZE, ge=2)
    lr: float = Field(default=settings.ADAM_LR, gt=0.0)
    score_eps: float = Field(default=settings.GAN_SCORE_EPS, gt=0.0, lt=0.5)
    weights: LossWeights = Field(default_factory=LossWeights)

    @field_validator('mode', mode='before')
    @classmethod
    def normalize_mode(cls, v: str | GanMode) -> str | GanMode:
        """cvae / cvae_acgan 都映射到 CVAE 模式"""
        if isinstance(v, str) and not isinstance(v, GanMode):
            return GanMode.CVAE if v.lower().startswith('cvae') else GanMode.ACGAN
        return v

    @field_validator('snapshot_epochs')
    @classmethod
    def check_snapshots(cls, v: list[int]) -> list[int]:
        if not v or min(v) < 1:
            raise ValueError('快照 epoch 必须为正且至少一个')
        return sorted(set(v))
