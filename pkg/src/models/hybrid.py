#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : hybrid.py
# @Software: Cursor
# @Description: Inception + 循环网络混合分类器
"""
Inception/循环混合网络

在 DCNN 的基础上把 Conv3/Conv4 换成 Inception 模块, 并增加一条两层循环网络作为
全连接路径的并行通道:

    全连接路径  每帧 (输入 ‖ 卷积输出) → FC1..3, 对帧取平均
    循环通道    每帧卷积输出展平为一个时间步, 取最后隐状态
    输出        两路拼接后接分类层

V3 把 Conv2 的逐帧输出排成 (通道 × 帧 × 位置) 的二维图, Inception 模块做二维卷积,
池化只沿位置轴。
"""
import numpy as np

from src.common.enums import ClassifierVariant, HybridVariant, InceptionKind, RecurrentKind
from src.core.exceptions import errors
from src.engine import functional as F
from src.engine.module import Linear, Recurrent
from src.engine.tensor import Tensor
from src.models.blocks import StackBuilder, build_inception_module
from src.models.dcnn import build_fc_path
from src.models.network import Network
from src.models.spec import HEAD_SOFTMAX, LayerSpec, NetworkSpec

# 变体 -> (两个 Inception 模块类型, 循环单元, 卷积维数)
HYBRID_LAYOUT: dict[ClassifierVariant, tuple[tuple[InceptionKind, InceptionKind], RecurrentKind, int]] = {
    ClassifierVariant.INCEPLSTM: ((InceptionKind.I, InceptionKind.I), RecurrentKind.LSTM, 1),
    ClassifierVariant.INCEPGRU_V1: ((InceptionKind.II, InceptionKind.II), RecurrentKind.GRU, 1),
    ClassifierVariant.INCEPGRU_V2: ((InceptionKind.I, InceptionKind.II), RecurrentKind.GRU, 1),
    ClassifierVariant.INCEPGRU_V3: ((InceptionKind.II, InceptionKind.II), RecurrentKind.GRU, 2),
}

HYBRID_VARIANTS = {
    HybridVariant.INCEP_LSTM: ClassifierVariant.INCEPLSTM,
    HybridVariant.INCEP_GRU_V1: ClassifierVariant.INCEPGRU_V1,
    HybridVariant.INCEP_GRU_V2: ClassifierVariant.INCEPGRU_V2,
    HybridVariant.INCEP_GRU_V3: ClassifierVariant.INCEPGRU_V3,
}


class HybridNet(Network):
    def __init__(self, spec: NetworkSpec) -> None:
        super().__init__(spec)
        try:
            kinds, cell, dims = HYBRID_LAYOUT[ClassifierVariant(spec.variant)]
        except (KeyError, ValueError) as e:
            raise errors.ConfigError(msg='未知的混合网络变体', data=spec.variant) from e
        if spec.n_cities:
            raise errors.ConfigError(msg='城市对抗分支只支持 DCNN 系列网络', data=spec.variant)
        frames, channels, filters = spec.input_shape
        self.dims = dims
        width = 4 * channels * spec.dcnn_width

        front = StackBuilder((channels, filters), dims=1, compact=spec.compact, seed=spec.seed, prefix='front.')
        front.conv_bn_relu(width // 2, 3, 0, 1, 'conv1').pool(2, 1, 2, 'pool1')
        front.conv_bn_relu(width, 3, 0, 1, 'conv2').pool(2, 0, 2, 'pool2').dropout(spec.dropout, 'pool2_dropout')
        self.front = front.build('front')

        positions = front.shape[1]
        if dims == 1:
            incep = StackBuilder(front.shape, dims=1, compact=spec.compact, seed=spec.seed, prefix='inception.')
            size, pads, stride = 2, (1, 0), 2
        else:
            incep = StackBuilder((width, frames, positions), dims=2, compact=spec.compact, seed=spec.seed,
                                 prefix='inception.')
            size, pads, stride = (1, 2), ((0, 1), (0, 0)), (1, 2)
        for index, kind in enumerate(kinds, start=1):
            incep.add(build_inception_module(kind, width, dims, seed=spec.seed, name=f'incep{index}'))
            incep.pool(size, pads[index - 1], stride, f'pool{index + 2}')
        incep.dropout(spec.dropout, 'pool4_dropout')
        self.inception = incep.build('inception')
        # 每帧卷积输出 (通道, 位置)
        self.conv_shape = incep.shape if dims == 1 else (incep.shape[0], incep.shape[2])
        conv_features = int(np.prod(self.conv_shape))

        fc = build_fc_path(channels * filters + conv_features, spec)
        self.fc = fc.build('fc')
        records = front.records + incep.records + fc.records
        joined = spec.fc_units
        if spec.recurrent:
            self.rnn = Recurrent(cell, conv_features, spec.rnn_hidden, num_layers=2, seed=spec.seed, name='rnn')
            records.append(LayerSpec('rnn', f'Recurrent{cell.value}', (frames, conv_features), (spec.rnn_hidden,)))
            joined += spec.rnn_hidden
        self.classifier = Linear(joined, spec.n_classes, seed=spec.seed, name='classifier')
        records.append(LayerSpec('classifier', 'Linear', (joined,), (spec.n_classes,)))
        self.finalize(records)

    def conv_sequence(self, x: Tensor) -> Tensor:
        """(batch, L, c, n) -> 每帧展平的卷积输出 (batch, L, features)"""
        batch, frames = x.shape[:2]
        front = self.front(F.reshape(x, (batch * frames,) + x.shape[2:]))
        if self.dims == 1:
            out = self.inception(front)
        else:
            grid = F.transpose(F.reshape(front, (batch, frames) + front.shape[1:]), (0, 2, 1, 3))
            out = F.transpose(self.inception(grid), (0, 2, 1, 3))
        return F.reshape(out, (batch, frames, -1))

    def fc_features(self, x: Tensor, sequence: Tensor | None = None) -> Tensor:
        """全连接路径输出, 对帧取平均 (batch, fc_units)"""
        batch, frames = x.shape[:2]
        sequence = self.conv_sequence(x) if sequence is None else sequence
        joined = F.concat(
            [F.reshape(x, (batch * frames, -1)), F.reshape(sequence, (batch * frames, -1))], axis=1
        )
        return F.mean(F.reshape(self.fc(joined), (batch, frames, -1)), axis=1)

    def heads(self, x: Tensor) -> tuple[Tensor, None]:
        sequence = self.conv_sequence(x)
        features = self.fc_features(x, sequence)
        if self.spec.recurrent:
            features = F.concat([features, self.rnn(sequence).hidden], axis=1)
        return self.classifier(features), None


def build_hybrid(
    variant: HybridVariant | ClassifierVariant | str,
    c: int,
    n: int,
    frames: int,
    n_classes: int = 10,
    fc_units: int = 1024,
    rnn_hidden: int = 64,
    width: int = 1,
    recurrent: bool = True,
    compact: bool = False,
    dropout: float = 0.3,
    seed: int = 0,
) -> HybridNet:
    if variant in HYBRID_VARIANTS:
        variant = HYBRID_VARIANTS[HybridVariant(variant)]
    elif variant not in ClassifierVariant.get_member_values() or ClassifierVariant(variant) not in HYBRID_LAYOUT:
        raise errors.ConfigError(msg='未知的混合网络变体', data=str(variant))
    spec = NetworkSpec(
        variant=ClassifierVariant(variant).value,
        input_shape=(frames, c, n),
        head=HEAD_SOFTMAX,
        n_classes=n_classes,
        dcnn_width=width,
        fc_units=fc_units,
        rnn_hidden=rnn_hidden,
        recurrent=recurrent,
        compact=compact,
        dropout=dropout,
        seed=seed,
    )
    return HybridNet(spec)
