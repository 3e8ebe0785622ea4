#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : registry.py
# @Software: Cursor
# @Description: 按变体名构建分类器
from src.common.enums import ClassifierVariant
from src.core.exceptions import errors
from src.models.config import ClassifierConfig
from src.models.dcnn import DCNN
from src.models.fcnn import FCNN
from src.models.hybrid import HYBRID_LAYOUT, HybridNet
from src.models.network import Network
from src.models.spec import HEAD_DCT, HEAD_FRAME_WISE, HEAD_SOFTMAX, NetworkSpec

HEADS = {
    ClassifierVariant.FCNN: HEAD_SOFTMAX,
    ClassifierVariant.DCNN: HEAD_FRAME_WISE,
    ClassifierVariant.CITY_ADVERSARY: HEAD_FRAME_WISE,
    ClassifierVariant.DCNN_DCT: HEAD_DCT,
    ClassifierVariant.CITY_ADVERSARY_DCT: HEAD_DCT,
}
CITY_ADVERSARIES = {ClassifierVariant.CITY_ADVERSARY, ClassifierVariant.CITY_ADVERSARY_DCT}


def build_from_spec(spec: NetworkSpec) -> Network:
    try:
        variant = ClassifierVariant(spec.variant)
    except ValueError as e:
        raise errors.ConfigError(msg='未知的分类器变体', data=spec.variant) from e
    if variant == ClassifierVariant.FCNN:
        return FCNN(spec)
    if variant in HYBRID_LAYOUT:
        return HybridNet(spec)
    return DCNN(spec)


def build_classifier(
    config: ClassifierConfig,
    input_shape: tuple[int, int, int],
    n_classes: int = 10,
    n_cities: int = 0,
    seed: int = 0,
) -> Network:
    """
    构建分类器

    :param input_shape: 单个片段的 L × c × n
    :param n_cities: 训练集城市数, 仅城市对抗变体使用
    """
    variant = ClassifierVariant(config.variant)
    if variant in CITY_ADVERSARIES and n_cities < 2:
        raise errors.ConfigError(msg='城市对抗分支至少需要 2 个城市', data=f'n_cities={n_cities}')
    spec = NetworkSpec(
        variant=variant.value,
        input_shape=tuple(input_shape),  # type: ignore[arg-type]
        head=HEADS.get(variant, HEAD_SOFTMAX),
        n_classes=n_classes,
        width=config.width,
        dcnn_width=config.dcnn_width,
        fc_units=config.fc_units,
        dropout=config.dropout,
        compact=config.compact,
        seed=seed,
        n_cities=n_cities if variant in CITY_ADVERSARIES else 0,
        city_lambda=config.city_lambda,
        city_hidden=config.city_hidden,
        rnn_hidden=config.rnn_hidden,
        recurrent=config.recurrent,
    )
    return build_from_spec(spec)
