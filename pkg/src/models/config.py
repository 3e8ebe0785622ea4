#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : config.py
# @Software: Cursor
# @Description: 分类器结构配置
from pydantic import BaseModel, Field, field_validator

from src.common.enums import ClassifierVariant
from src.core.conf import settings


class ClassifierConfig(BaseModel):
    """分类器结构超参"""
    variant: ClassifierVariant = ClassifierVariant.FCNN
    # FCNN 通道基数, 论文取 14 (14c / 28c / 56c / 128c)
    width: int = Field(default=14, ge=1)
    # DCNN 通道倍数, 1 即 2c / 4c / 8c / 16c
    dcnn_width: int = Field(default=1, ge=1)
    fc_units: int = Field(default=1024, ge=1)
    dropout: float = Field(default=0.3, ge=0.0, lt=1.0)
    compact: bool = False
    city_lambda: float = Field(default=settings.CITY_ADVERSARY_LAMBDA, ge=0.0)
    city_hidden: int = Field(default=settings.CITY_ADVERSARY_HIDDEN, ge=1)
    rnn_hidden: int = Field(default=64, ge=1)
    recurrent: bool = True

    @field_validator('variant', mode='before')
    @classmethod
    def normalize_variant(cls, v: str | ClassifierVariant) -> str | ClassifierVariant:
        """变体名大小写不敏感"""
        return v.lower() if isinstance(v, str) else v
