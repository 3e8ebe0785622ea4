#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : fcnn.py
# @Software: Cursor
# @Description: 全卷积分类网络
"""
FCNN

把整段特征图当作 c 通道图像 (c × L × n) 做二维卷积:

    Conv1  5×5 p2 s2 ×w·c, 3×3 ×w·c, 2×2 池化
    Conv2  两层 3×3 ×2w·c, 2×2 池化
    Conv3  四层 3×3 ×4w·c, 前三层后 dropout, 2×2 池化
    Conv4  两层 3×3 无填充 ×(128w/14)·c, 各接 dropout 0.5
    1×1 卷积到类别数, 全局平均池化
"""
from src.core.exceptions import errors
from src.engine import functional as F
from src.engine.module import Conv, GlobalAvgPool
from src.engine.tensor import Tensor
from src.models.blocks import StackBuilder
from src.models.network import Network
from src.models.spec import HEAD_SOFTMAX, NetworkSpec

CONV4_DROPOUT = 0.5


def fcnn_widths(width: int, channels: int) -> tuple[int, int, int, int]:
    """四个卷积块的输出通道数, width=14 时为 14c / 28c / 56c / 128c"""
    return width * channels, 2 * width * channels, 4 * width * channels, round(128 * width / 14) * channels


class FCNN(Network):
    def __init__(self, spec: NetworkSpec) -> None:
        super().__init__(spec)
        if spec.n_cities:
            raise errors.ConfigError(msg='城市对抗分支只支持 DCNN 系列网络', data=spec.variant)
        frames, channels, filters = spec.input_shape
        w1, w2, w3, w4 = fcnn_widths(spec.width, channels)
        b = StackBuilder((channels, frames, filters), dims=2, compact=spec.compact, seed=spec.seed)
        b.conv_bn_relu(w1, 5, 2, 2, 'conv1a').conv_bn_relu(w1, 3, 1, 1, 'conv1b').pool(2, 0, 2, 'pool1')
        b.conv_bn_relu(w2, 3, 1, 1, 'conv2a').conv_bn_relu(w2, 3, 1, 1, 'conv2b').pool(2, 0, 2, 'pool2')
        for tag in 'abc':
            b.conv_bn_relu(w3, 3, 1, 1, f'conv3{tag}').dropout(spec.dropout, f'conv3{tag}_dropout')
        b.conv_bn_relu(w3, 3, 1, 1, 'conv3d').pool(2, 0, 2, 'pool3')
        for tag in 'ab':
            b.conv_bn_relu(w4, 3, 0, 1, f'conv4{tag}').dropout(CONV4_DROPOUT, f'conv4{tag}_dropout')
        b.add(Conv(w4, spec.n_classes, 1, dims=2, seed=spec.seed, name='classifier'))
        b.add(GlobalAvgPool(name='gap'))
        self.body = b.build('body')
        self.finalize(b.records)

    def heads(self, x: Tensor) -> tuple[Tensor, None]:
        # (batch, L, c, n) -> (batch, c, L, n)
        return self.body(F.transpose(x, (0, 2, 1, 3))), None


def build_fcnn(
    c: int,
    n: int,
    width: int = 14,
    frames: int = 500,
    n_classes: int = 10,
    compact: bool = False,
    dropout: float = 0.3,
    seed: int = 0,
) -> FCNN:
    if c < 1 or n < 8 or frames < 1:
        raise errors.ConfigError(msg='FCNN 输入尺寸必须为正', data=f'L={frames}, c={c}, n={n}')
    spec = NetworkSpec(
        variant='fcnn',
        input_shape=(frames, c, n),
        head=HEAD_SOFTMAX,
        n_classes=n_classes,
        width=width,
        dropout=dropout,
        compact=compact,
        seed=seed,
    )
    return FCNN(spec)
