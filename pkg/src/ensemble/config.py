#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : config.py
# @Software: Cursor
# @Description: 融合配置
import os

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from src.common.enums import VoteMethod
from src.core.exceptions import errors
from src.utils.file_ops import atomic_write_text
from src.utils.key_value import format_key_values, read_key_value_file


class EnsembleConfig(BaseModel):
    """
    融合成员与方式

    weighted 且未给出 weights 时, 权重由留出集拟合。
    """
    members: list[str] = Field(min_length=1)
    method: VoteMethod = VoteMethod.AVERAGE
    weights: list[float] | None = None
    name: str = 'fusion'

    @field_validator('weights')
    @classmethod
    def check_weights(cls, v: list[float] | None) -> list[float] | None:
        if v is None:
            return v
        if any(w < 0 for w in v):
            raise ValueError('权重必须非负')
        if sum(v) <= 0:
            raise ValueError('权重之和必须为正')
        return v

    @model_validator(mode='after')
    def check_members(self) -> 'EnsembleConfig':
        if len(set(self.members)) != len(self.members):
            raise ValueError('成员重复')
        if self.weights is not None and len(self.weights) != len(self.members):
            raise ValueError(f'权重个数 ({len(self.weights)}) 与成员个数 ({len(self.members)}) 不一致')
        return self

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> 'EnsembleConfig':
        raw = read_key_value_file(path)
        values: dict[str, object] = dict(raw)
        if 'members' in raw:
            values['members'] = [m.strip() for m in raw['members'].split(',') if m.strip()]
        if 'weights' in raw:
            values['weights'] = [w.strip() for w in raw['weights'].split(',') if w.strip()]
        try:
            return cls.model_validate(values)
        except ValidationError as e:
            field = '.'.join(str(p) for p in e.errors()[0]['loc']) or 'ensemble'
            raise errors.ConfigError(msg=f'融合配置无效: {field}', data=str(path)) from e

    def write(self, path: str | os.PathLike) -> None:
        values: dict[str, object] = {'name': self.name, 'method': self.method.value,
                                     'members': ','.join(self.members)}
        if self.weights is not None:
            values['weights'] = ','.join(repr(float(w)) for w in self.weights)
        atomic_write_text(path, format_key_values(values))
