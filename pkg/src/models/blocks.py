#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : blocks.py
# @Software: Cursor
# @Description: 网络构件: 逐层校验的层序列构建器、Inception 模块、DCT 时间注意力头
from typing import Sequence

import importlib

import numpy as np

from src.common.enums import InceptionKind
from src.core.exceptions import errors
C = importlib.import_module('src.engine.conv')  # 子模块; 包内同名函数 conv 会遮蔽 `from src.engine import conv`
from src.engine import functional as F
from src.engine.module import BatchNorm, Conv, Dropout, Linear, MaxPool, Module, ReLU, Sequential, Shape
from src.engine.spectral import dct1d, idct1d
from src.engine.tensor import Tensor
from src.models.spec import LayerSpec


class StackBuilder:
    """
    按单样本形状逐层追加并校验

    compact 模式下无填充卷积改为 same 填充, 池化窗口大于剩余尺寸时收缩为剩余尺寸。
    """

    def __init__(self, in_shape: Shape, dims: int = 1, compact: bool = False, seed: int = 0, prefix: str = '') -> None:
        self.shape = tuple(in_shape)
        self.dims = dims
        self.compact = compact
        self.seed = seed
        self.prefix = prefix
        self.layers: list[Module] = []
        self.records: list[LayerSpec] = []

    def add(self, layer: Module) -> 'StackBuilder':
        out_shape = layer.output_shape(self.shape)
        self.records.append(
            LayerSpec(name=f'{self.prefix}{layer.name}', kind=type(layer).__name__, in_shape=self.shape,
                      out_shape=out_shape)
        )
        self.shape = out_shape
        self.layers.append(layer)
        return self

    def conv_bn_relu(self, out_channels: int, kernel: int, pad: int, stride: int, name: str) -> 'StackBuilder':
        if self.compact and pad == 0 and kernel > 1:
            pad = kernel // 2
        self.add(Conv(self.shape[0], out_channels, kernel, self.dims, pad, stride, seed=self.seed, name=name))
        self.add(BatchNorm(out_channels, name=f'{name}_bn'))
        return self.add(ReLU(name=f'{name}_relu'))

    def pool(self, size: int | Sequence[int], pad: int | Sequence[int], stride: int | Sequence[int],
             name: str) -> 'StackBuilder':
        sizes, pads, strides = C.as_tuple(size, self.dims), C.as_tuple(pad, self.dims), C.as_tuple(stride, self.dims)
        if self.compact:
            clipped = [
                (n, 0, n) if n < k else (k, p, s)
                for n, k, p, s in zip(self.shape[1:], sizes, pads, strides)
            ]
            sizes, pads, strides = (tuple(column) for column in zip(*clipped))
        return self.add(MaxPool(sizes, self.dims, pads, strides, name=name))

    def dropout(self, p: float, name: str) -> 'StackBuilder':
        return self.add(Dropout(p, seed=self.seed, name=name))

    def dense_bn_relu(self, units: int, name: str, p: float = 0.0) -> 'StackBuilder':
        self.add(Linear(self.shape[-1], units, seed=self.seed, name=name))
        self.add(BatchNorm(units, name=f'{name}_bn'))
        self.add(ReLU(name=f'{name}_relu'))
        return self.dropout(p, f'{name}_dropout') if p > 0 else self

    def build(self, name: str) -> Sequential:
        return Sequential(self.layers, name=name)


class InceptionModule(Module):
    """
    四分支 Inception 模块, 各分支输出 in_channels / 4 个通道并在通道维拼接

    I: 1 | 1→3 | 1→5 | pool→1
    II: 1 | 1→3 | 1→3→3 | pool→1, 5 核由两层 3 核代替
    所有分支 same 填充, 输出尺寸与输入相同。
    """

    def __init__(self, kind: InceptionKind, in_channels: int, dims: int = 1, seed: int = 0,
                 name: str = 'inception') -> None:
        super().__init__(name)
        if in_channels % 4 != 0 or in_channels < 4:
            raise errors.ConfigError(msg=f'{name}: 输入通道数必须是 4 的正整数倍', data=f'in_channels={in_channels}')
        self.kind = InceptionKind(kind)
        self.in_channels, self.dims = in_channels, dims
        quarter = in_channels // 4

        def branch(tag: str, kernels: Sequence[int], pooled: bool = False) -> Sequential:
            builder = StackBuilder((in_channels,) + (8,) * dims, dims, seed=seed)
            if pooled:
                builder.add(MaxPool(3, dims, pad=1, stride=1, name=f'{name}_{tag}_pool'))
            for index, kernel in enumerate(kernels):
                builder.conv_bn_relu(quarter, kernel, kernel // 2, 1, f'{name}_{tag}{index}')
            return builder.build(tag)

        deep = (1, 5) if self.kind == InceptionKind.I else (1, 3, 3)
        self.branch1 = branch('b1', (1,))
        self.branch2 = branch('b2', (1, 3))
        self.branch3 = branch('b3', deep)
        self.branch4 = branch('b4', (1,), pooled=True)

    def forward(self, x: Tensor) -> Tensor:
        outputs = [self.branch1(x), self.branch2(x), self.branch3(x), self.branch4(x)]
        return F.concat(outputs, axis=1)

    def output_shape(self, in_shape: Shape) -> Shape:
        if len(in_shape) != self.dims + 1 or in_shape[0] != self.in_channels:
            raise errors.ShapeError(msg=f'{self.name}: 输入形状不匹配', data=f'{in_shape}, 需要通道 {self.in_channels}')
        return in_shape


def build_inception_module(kind: InceptionKind, in_channels: int, dims: int = 1, seed: int = 0,
                           name: str = 'inception') -> InceptionModule:
    if dims not in (1, 2):
        raise errors.ConfigError(msg='Inception 模块只支持 1D 或 2D 卷积', data=f'dims={dims}')
    return InceptionModule(kind, in_channels, dims, seed, name)


def dct_temporal_head(frame_logits: Tensor, attention: Tensor) -> Tensor:
    """
    DCT 时间注意力头

    沿帧轴做 DCT-II, 按 sigmoid(attention) 逐系数加权, 逆变换后对帧取平均。

    :param frame_logits: (batch, L, classes), 最后一个仿射层的输出
    :param attention: (L, classes) 注意力 logit
    :return: (batch, classes) 片段 logits
    """
    if frame_logits.ndim != 3 or tuple(attention.shape) != tuple(frame_logits.shape[1:]):
        raise errors.ShapeError(
            msg='DCT 头输入应为 (batch, L, classes) 且注意力为 (L, classes)',
            data=f'frames={frame_logits.shape}, attention={attention.shape}',
        )
    coefficients = dct1d(frame_logits, axis=1)
    filtered = idct1d(coefficients * F.sigmoid(attention), axis=1)
    return F.mean(filtered, axis=1)


def attention_init(frames: int, classes: int, value: float = 4.0) -> Tensor:
    return Tensor(np.full((frames, classes), value), requires_grad=True)
