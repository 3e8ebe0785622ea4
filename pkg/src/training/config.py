#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : config.py
# @Software: Cursor
# @Description: 训练配置
from pydantic import BaseModel, Field, model_validator

from src.core.conf import settings


class TrainConfig(BaseModel):
    """分类器训练超参, 默认值来自全局配置"""
    max_epochs: int = Field(default=settings.TRAIN_MAX_EPOCHS, ge=1)
    patience: int = Field(default=settings.TRAIN_PATIENCE, ge=1)
    lr: float = Field(default=settings.ADAM_LR, ge=0.0)
    beta1: float = Field(default=settings.ADAM_BETA1, ge=0.0, lt=1.0)
    beta2: float = Field(default=settings.ADAM_BETA2, ge=0.0, lt=1.0)
    eps: float = Field(default=settings.ADAM_EPS, gt=0.0)
    lr_decay_patience: int = Field(default=settings.TRAIN_LR_DECAY_PATIENCE, ge=1)
    lr_decay_factor: float = Field(default=settings.TRAIN_LR_DECAY_FACTOR, gt=0.0, le=1.0)
    lr_floor: float = Field(default=settings.TRAIN_LR_FLOOR, ge=0.0)
    batch_size: int = Field(default=settings.TRAIN_BATCH_SIZE, ge=2)
    seeds: list[int] = Field(default_factory=lambda: list(settings.TRAIN_SEEDS), min_length=1)
    val_fraction: float = Field(default=settings.TRAIN_VAL_FRACTION, gt=0.0, lt=1.0)

    @model_validator(mode='after')
    def check_patience(self) -> 'TrainConfig':
        if self.patience >= self.max_epochs:
            raise ValueError(f'patience ({self.patience}) 必须小于 max_epochs ({self.max_epochs})')
        return self
