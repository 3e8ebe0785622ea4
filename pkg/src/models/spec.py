#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : spec.py
# @Software: Cursor
# @Description: 声明式网络描述
"""
网络描述

NetworkSpec 记录构建参数与逐层形状轨迹, 以 JSON 形式写入 checkpoint;
按 NetworkSpec 重新构建得到相同结构, 再载入参数即可恢复网络。
"""
import msgspec

from src.core.exceptions import errors

HEAD_SOFTMAX = 'softmax'
HEAD_FRAME_WISE = 'frame-wise'
HEAD_DCT = 'dct-temporal'


class LayerSpec(msgspec.Struct, frozen=True):
    """单层描述: 名称、类型、单样本输入/输出形状"""
    name: str
    kind: str
    in_shape: tuple[int, ...]
    out_shape: tuple[int, ...]


class NetworkSpec(msgspec.Struct):
    """网络描述"""
    variant: str
    # L × c × n
    input_shape: tuple[int, int, int]
    head: str
    n_classes: int = 10
    width: int = 14
    dcnn_width: int = 1
    fc_units: int = 1024
    dropout: float = 0.3
    compact: bool = False
    seed: int = 0
    n_cities: int = 0
    city_lambda: float = 1.0
    city_hidden: int = 256
    rnn_hidden: int = 64
    recurrent: bool = True
    layers: list[LayerSpec] = []

    def to_json(self) -> bytes:
        return msgspec.json.encode(self)

    @classmethod
    def from_json(cls, payload: bytes) -> 'NetworkSpec':
        try:
            return msgspec.json.decode(payload, type=cls)
        except (msgspec.ValidationError, msgspec.DecodeError) as e:
            raise errors.CorruptionError(msg='网络描述无法解析', data=str(e)) from e

    def replace(self, **changes: object) -> 'NetworkSpec':
        return msgspec.structs.replace(self, **changes)
