#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : networks.py
# @Software: Cursor
# @Description: 判别器 / 生成器 / 编码器
"""
GAN 三元组

判别器是分类器的简化版: 三个 3×3 步长 2 的卷积块 (通道 w·c, 2w·c, 4w·c), 展平后经一层
隐藏全连接得到瓶颈特征, 再分出真假分数 (sigmoid) 与场景 logits 两个头。
生成器与判别器镜像: 噪声与标签嵌入拼接后经全连接展开为判别器最后一个卷积块的形状,
再由转置卷积逐级还原到特征图尺寸。编码器复用判别器的卷积结构, 输出 (μ, logvar)。
CVAE 模式下生成器同时充当解码器。
"""
import dataclasses

import numpy as np

from src.common.enums import GanMode
from src.core.exceptions import errors
from src.engine import functional as F
from src.engine.module import BatchNorm, Conv, ConvTranspose, Flatten, Linear, Module, ReLU, Sequential, Shape
from src.engine.tensor import Tensor, get_default_dtype
from src.gan.config import GanConfig
from src.models.blocks import StackBuilder

N_BLOCKS = 3


def downsample_extents(extent: int) -> list[int]:
    """步长 2、填充 1 的 3 核卷积逐级尺寸: ceil(n / 2)"""
    extents = [extent]
    for _ in range(N_BLOCKS):
        extents.append(-(-extents[-1] // 2))
    return extents


def conv_tower(in_shape: Shape, width: int, seed: int, prefix: str) -> tuple[Sequential, list[Module], Shape]:
    """判别器/编码器共用的下采样卷积块"""
    channels = in_shape[0]
    b = StackBuilder(in_shape, dims=2, seed=seed, prefix=f'{prefix}.')
    blocks: list[Module] = []
    for index in range(N_BLOCKS):
        start = len(b.layers)
        b.conv_bn_relu(width * channels * 2 ** index, 3, 1, 2, f'{prefix}_conv{index + 1}')
        blocks.append(Sequential(b.layers[start:], name=f'block{index + 1}'))
    return Sequential(blocks, name='tower'), blocks, b.shape


@dataclasses.dataclass
class DiscriminatorOutput:
    score: Tensor
    scene_logits: Tensor
    features: list[Tensor]


class Discriminator(Module):
    def __init__(self, in_shape: Shape, n_classes: int, config: GanConfig, seed: int = 0) -> None:
        super().__init__('discriminator')
        self.tower, self.blocks, conv_shape = conv_tower(in_shape, config.width, seed, 'dis')
        flat = int(np.prod(conv_shape))
        self.flatten = Flatten()
        self.hidden = Linear(flat, config.hidden, seed=seed, name='dis_hidden')
        self.score_head = Linear(config.hidden, 1, seed=seed, name='dis_score')
        self.scene_head = Linear(config.hidden, n_classes, seed=seed, name='dis_scene')

    def forward(self, x: Tensor) -> DiscriminatorOutput:
        """x: (batch, c, L, n)"""
        features = []
        for block in self.blocks:
            x = block(x)
            features.append(self.flatten(x))
        bottleneck = F.relu(self.hidden(features[-1]))
        features.append(bottleneck)
        score = F.sigmoid(F.reshape(self.score_head(bottleneck), (-1,)))
        return DiscriminatorOutput(score=score, scene_logits=self.scene_head(bottleneck), features=features)


class Encoder(Module):
    def __init__(self, in_shape: Shape, config: GanConfig, seed: int = 0) -> None:
        super().__init__('encoder')
        self.tower, _, conv_shape = conv_tower(in_shape, config.width, seed, 'enc')
        self.flatten = Flatten()
        self.hidden = Linear(int(np.prod(conv_shape)), config.hidden, seed=seed, name='enc_hidden')
        self.mu = Linear(config.hidden, config.noise_dim, seed=seed, name='enc_mu')
        self.logvar = Linear(config.hidden, config.noise_dim, seed=seed, name='enc_logvar')

    def forward(self, x: Tensor) -> tuple[Tensor, Tensor]:
        h = F.relu(self.hidden(self.flatten(self.tower(x))))
        return self.mu(h), self.logvar(h)


class Generator(Module):
    def __init__(self, in_shape: Shape, n_classes: int, config: GanConfig, seed: int = 0) -> None:
        super().__init__('generator')
        channels = in_shape[0]
        self.n_classes = n_classes
        rows, cols = downsample_extents(in_shape[1]), downsample_extents(in_shape[2])
        self.seed_shape = (config.width * channels * 2 ** (N_BLOCKS - 1), rows[-1], cols[-1])
        self.embed = Linear(n_classes, config.embed_dim, seed=seed, name='gen_embed')
        self.project = Linear(config.noise_dim + config.embed_dim, int(np.prod(self.seed_shape)), seed=seed,
                              name='gen_project')
        self.project_bn = BatchNorm(self.seed_shape[0], name='gen_project_bn')
        layers: list[Module] = []
        in_channels = self.seed_shape[0]
        for index in range(N_BLOCKS, 0, -1):
            out_channels = channels if index == 1 else in_channels // 2
            # 目标尺寸为奇数时用 3 核 (2n − 1), 偶数时用 4 核 (2n)
            kernel = (3 + (rows[index - 1] % 2 == 0), 3 + (cols[index - 1] % 2 == 0))
            layers.append(ConvTranspose(in_channels, out_channels, kernel, dims=2, pad=1, stride=2, seed=seed,
                                        name=f'gen_deconv{index}'))
            if index > 1:
                layers += [BatchNorm(out_channels, name=f'gen_deconv{index}_bn'), ReLU(name=f'gen_deconv{index}_relu')]
            in_channels = out_channels
        self.body = Sequential(layers, name='body')
        if self.body.output_shape(self.seed_shape) != tuple(in_shape):
            raise errors.ConfigError(
                msg='生成器输出形状与特征图不一致', data=f'{self.body.output_shape(self.seed_shape)} vs {in_shape}'
            )

    def forward(self, labels: np.ndarray, z: Tensor) -> Tensor:
        """(标签, 噪声) -> (batch, c, L, n)"""
        onehot = np.eye(self.n_classes, dtype=z.dtype)[np.asarray(labels)]
        condition = F.relu(self.embed(Tensor(onehot, dtype=z.dtype)))
        h = self.project(F.concat([z, condition], axis=1))
        h = F.relu(self.project_bn(F.reshape(h, (z.shape[0],) + self.seed_shape)))
        return self.body(h)


class GanTriple(Module):
    """
    判别器 + 生成器 (+ 编码器)

    对外输入输出的特征图布局为 (batch, L, c, n), 原始 (未标准化) 数值;
    内部在标准化空间中训练, 标准化参数是 buffer。
    """

    def __init__(self, input_shape: tuple[int, int, int], n_classes: int, config: GanConfig, seed: int = 0) -> None:
        super().__init__('gan')
        frames, channels, filters = input_shape
        self.input_shape = tuple(input_shape)
        self.n_classes = n_classes
        self.config = config
        self.seed = seed
        image = (channels, frames, filters)
        self.discriminator = Discriminator(image, n_classes, config, seed)
        self.generator = Generator(image, n_classes, config, seed)
        self.encoder = Encoder(image, config, seed) if config.mode == GanMode.CVAE else None
        n_features = N_BLOCKS + 1
        if not -n_features <= config.feature_layer < n_features:
            raise errors.ConfigError(
                msg='重建损失的判别器特征层越界', data=f'feature_layer={config.feature_layer}, 可用 {n_features} 层'
            )
        dtype = get_default_dtype()
        self.register_buffer('input_mean', np.zeros((channels, filters), dtype=dtype))
        self.register_buffer('input_std', np.ones((channels, filters), dtype=dtype))

    @property
    def noise_dim(self) -> int:
        return self.config.noise_dim

    def fit_standardization(self, features: np.ndarray) -> None:
        axes = tuple(range(features.ndim - 2))
        self.set_buffer('input_mean', features.mean(axis=axes))
        self.set_buffer('input_std', np.maximum(features.std(axis=axes), 1e-6))

    def to_image(self, features: np.ndarray) -> Tensor:
        """原始特征 (batch, L, c, n) -> 标准化后的 (batch, c, L, n)"""
        if tuple(features.shape[1:]) != self.input_shape:
            raise errors.ShapeError(msg='GAN 输入形状不匹配', data=f'{features.shape[1:]} vs {self.input_shape}')
        standardized = (features - self.input_mean) / self.input_std
        return Tensor(np.transpose(standardized, (0, 2, 1, 3)))

    def to_features(self, image: np.ndarray) -> np.ndarray:
        """生成器输出 -> 原始尺度的 (batch, L, c, n)"""
        return np.transpose(image, (0, 2, 1, 3)) * self.input_std + self.input_mean

    def role_parameters(self, role: str) -> list[tuple[str, Tensor]]:
        return [(name, p) for name, p in self.named_parameters() if name.startswith(f'{role}.')]
