#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : dcnn.py
# @Software: Cursor
# @Description: 逐帧一维卷积网络, 可选 DCT 时间头与城市对抗分支
"""
DCNN

每帧的 c × n 切片做一维卷积 (沿滤波器轴):

    Conv1..4  k3 无填充, 通道 c→2c→4c→8c→16c, 各接 BN-ReLU 与 2 窗口池化
              (填充依次 1/0/1/0, 步长 2), 第 2、4 个池化后 dropout
    拼接      展平的输入帧 ‖ 展平的 Conv4 输出
    FC1..3    fc_units 宽, BN-ReLU, FC1/FC2 后 dropout
    输出      类别数个 logits

DCT 头版本把逐帧 logits 经 dct_temporal_head 汇总为片段 logits;
城市对抗分支接在 Conv4 输出 (展平前): grad_reverse(λ) → FC → ReLU → FC。
"""
import numpy as np

from src.core.conf import settings
from src.core.exceptions import errors
from src.engine import functional as F
from src.engine.layers import LayerParams
from src.engine.module import Flatten, GradReverse, Linear, ReLU
from src.engine.tensor import Tensor
from src.models.blocks import StackBuilder, attention_init, dct_temporal_head
from src.models.network import Network
from src.models.spec import HEAD_DCT, HEAD_FRAME_WISE, LayerSpec, NetworkSpec

# (池化填充, 池化后 dropout)
CONV_BLOCKS = ((1, False), (0, True), (1, False), (0, True))

CITY_VARIANTS = {'dcnn': 'city_adversary', 'dcnn_dct': 'city_adversary_dct'}


def build_fc_path(in_features: int, spec: NetworkSpec) -> StackBuilder:
    """三层全连接块, 输入为一帧的拼接特征"""
    b = StackBuilder((in_features,), seed=spec.seed, prefix='fc.')
    b.dense_bn_relu(spec.fc_units, 'fc1', spec.dropout)
    b.dense_bn_relu(spec.fc_units, 'fc2', spec.dropout)
    return b.dense_bn_relu(spec.fc_units, 'fc3')


class DCNN(Network):
    def __init__(self, spec: NetworkSpec) -> None:
        super().__init__(spec)
        frames, channels, filters = spec.input_shape
        width = channels * spec.dcnn_width
        trunk = StackBuilder((channels, filters), dims=1, compact=spec.compact, seed=spec.seed, prefix='trunk.')
        for index, (pool_pad, with_dropout) in enumerate(CONV_BLOCKS, start=1):
            width *= 2
            trunk.conv_bn_relu(width, 3, 0, 1, f'conv{index}').pool(2, pool_pad, 2, f'pool{index}')
            if with_dropout:
                trunk.dropout(spec.dropout, f'pool{index}_dropout')
        self.trunk = trunk.build('trunk')
        self.conv_shape = trunk.shape
        conv_features = int(np.prod(self.conv_shape))

        fc = build_fc_path(channels * filters + conv_features, spec)
        self.fc = fc.build('fc')
        self.classifier = Linear(spec.fc_units, spec.n_classes, seed=spec.seed, name='classifier')
        records = trunk.records + fc.records
        records.append(LayerSpec('classifier', 'Linear', fc.shape, (spec.n_classes,)))

        if spec.head == HEAD_DCT:
            self.attention = LayerParams(weight=attention_init(frames, spec.n_classes))
            records.append(LayerSpec('attention', 'DctTemporalHead', (frames, spec.n_classes), (spec.n_classes,)))
        elif spec.head != HEAD_FRAME_WISE:
            raise errors.ConfigError(msg='DCNN 只支持逐帧或 DCT 时间头', data=spec.head)

        if spec.n_cities:
            if spec.n_cities < 2:
                raise errors.ConfigError(msg='城市对抗分支至少需要 2 个城市', data=f'n_cities={spec.n_cities}')
            city = StackBuilder(self.conv_shape, seed=spec.seed, prefix='city.')
            city.add(GradReverse(spec.city_lambda, name='grad_reverse')).add(Flatten(name='flatten'))
            city.add(Linear(conv_features, spec.city_hidden, seed=spec.seed, name='city_fc1'))
            city.add(ReLU(name='city_relu')).add(Linear(spec.city_hidden, spec.n_cities, seed=spec.seed, name='city_fc2'))
            self.city = city.build('city')
            records += city.records
        self.finalize(records)

    def frame_forward(self, frames: Tensor) -> tuple[Tensor, Tensor]:
        """(batch, c, n) -> (逐帧 logits, Conv4 输出)"""
        conv_out = self.trunk(frames)
        joined = F.concat([F.flatten(frames), F.flatten(conv_out)], axis=1)
        return self.classifier(self.fc(joined)), conv_out

    def heads(self, x: Tensor) -> tuple[Tensor, Tensor | None]:
        if self.frame_wise:
            logits, conv_out = self.frame_forward(x)
        else:
            batch, frames = x.shape[:2]
            frame_logits, conv_out = self.frame_forward(F.reshape(x, (batch * frames,) + x.shape[2:]))
            logits = dct_temporal_head(F.reshape(frame_logits, (batch, frames, -1)), self.attention.weight)
        city_logits = self.city(conv_out) if self.has_city_branch else None
        return logits, city_logits


def build_dcnn(
    c: int,
    n: int,
    frames: int = 1,
    n_classes: int = 10,
    fc_units: int = 1024,
    width: int = 1,
    dct_head: bool = False,
    compact: bool = False,
    dropout: float = 0.3,
    seed: int = 0,
) -> DCNN:
    if c < 1 or n < 1 or frames < 1:
        raise errors.ConfigError(msg='DCNN 输入尺寸必须为正', data=f'L={frames}, c={c}, n={n}')
    spec = NetworkSpec(
        variant='dcnn_dct' if dct_head else 'dcnn',
        input_shape=(frames, c, n),
        head=HEAD_DCT if dct_head else HEAD_FRAME_WISE,
        n_classes=n_classes,
        dcnn_width=width,
        fc_units=fc_units,
        dropout=dropout,
        compact=compact,
        seed=seed,
    )
    return DCNN(spec)


def attach_city_adversary(
    net: Network, n_cities: int, lam: float = settings.CITY_ADVERSARY_LAMBDA, hidden: int | None = None
) -> DCNN:
    """
    在 DCNN 的卷积输出后接城市对抗分支

    按新描述重建网络并复制原有参数, 场景输出保持逐位一致。
    """
    if not isinstance(net, DCNN):
        raise errors.ConfigError(msg='城市对抗分支只支持 DCNN 系列网络', data=net.spec.variant)
    if n_cities < 2:
        raise errors.ConfigError(msg='城市对抗分支至少需要 2 个城市', data=f'n_cities={n_cities}')
    spec = net.spec.replace(
        variant=CITY_VARIANTS.get(net.spec.variant, net.spec.variant),
        n_cities=n_cities,
        city_lambda=lam,
        city_hidden=hidden or net.spec.city_hidden,
        layers=[],
    )
    attached = DCNN(spec)
    state = attached.state_dict()
    state.update({name: value for name, value in net.state_dict().items() if not name.startswith('city.')})
    attached.load_state_dict(state)
    attached.train(net.training)
    return attached
