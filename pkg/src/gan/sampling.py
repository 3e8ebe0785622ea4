#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : sampling.py
# @Software: Cursor
# @Description: 按场景标签采样生成特征
from typing import Sequence

import numpy as np

from src.common.dataclasses import FeatureMap
from src.common.enums import Provenance
from src.core.conf import settings
from src.core.exceptions import errors
from src.engine.tensor import Tensor, no_tape
from src.gan.networks import GanTriple

# 只属于单个片段的 metadata
CLIP_METADATA_KEYS = frozenset({'clip_id', 'scene', 'city', 'provenance', 'epoch', 'round'})


def sample_fakes(
    triple: GanTriple,
    scene_labels: Sequence[str],
    count_per_class: int,
    rng: np.random.Generator,
    epoch_tags: Sequence[int] = (),
    snapshots: dict[int, dict[str, np.ndarray]] | None = None,
    *,
    template: FeatureMap,
    label_set: Sequence[str] | None = None,
) -> list[FeatureMap]:
    """
    以场景标签为条件直接采样

    每个场景的样本按顺序轮流分配到 epoch_tags 中的生成器快照; 未给出快照时使用当前生成器。
    生成器在采样结束后恢复为调用前的参数。

    :param scene_labels: 需要采样的场景名
    :param template: 提供帧长/帧移/声道编码/特征类型的真实特征图, 片段级 metadata 不会被复制
    :param label_set: 场景名到下标的顺序, 默认全局场景表
    :return: 按场景、再按序号排列的特征图, metadata 带 provenance/epoch/scene
    """
    if template is None:
        raise errors.ContractError(msg='采样需要真实特征图作为模板')
    if tuple(template.shape) != triple.input_shape:
        raise errors.ShapeError(msg='模板形状与 GAN 输入不一致', data=f'{template.shape} vs {triple.input_shape}')
    label_set = list(label_set or settings.SCENE_LABELS)
    unknown = [s for s in scene_labels if s not in label_set]
    if unknown:
        raise errors.InputError(msg='未知的场景标签', data=unknown)
    if count_per_class < 0:
        raise errors.InputError(msg='每类样本数不能为负', data=f'count={count_per_class}')
    snapshots = snapshots or {}
    tags = list(epoch_tags) or [0]
    missing = [t for t in tags if t not in snapshots and snapshots]
    if missing:
        raise errors.InputError(msg='缺少生成器快照', data=[str(t) for t in missing])

    # 每个 (场景, 序号) 预先抽取噪声, 结果与快照加载顺序无关
    noise = rng.standard_normal((len(scene_labels), count_per_class, triple.noise_dim))
    current = {name: value.copy() for name, value in triple.state_dict().items() if name.startswith('generator.')}
    images: dict[tuple[int, int], tuple[np.ndarray, int]] = {}
    was_training = triple.training
    triple.eval()
    try:
        for slot, tag in enumerate(tags):
            if tag in snapshots:
                state = triple.state_dict()
                state.update(snapshots[tag])
                triple.load_state_dict(state)
            picks = [(i, j) for i in range(len(scene_labels)) for j in range(slot, count_per_class, len(tags))]
            if not picks:
                continue
            labels = np.array([label_set.index(scene_labels[i]) for i, _ in picks])
            z = Tensor(np.stack([noise[i, j] for i, j in picks]))
            with no_tape():
                generated = triple.to_features(triple.generator(labels, z).data)
            for (i, j), image in zip(picks, generated):
                images[(i, j)] = (image, tag)
    finally:
        state = triple.state_dict()
        state.update(current)
        triple.load_state_dict(state)
        triple.train(was_training)

    shared = {k: v for k, v in template.metadata.items() if k not in CLIP_METADATA_KEYS}
    fakes = []
    for i, scene in enumerate(scene_labels):
        for j in range(count_per_class):
            image, tag = images[(i, j)]
            fakes.append(
                FeatureMap(
                    data=image.astype(np.float32),
                    hop_ms=template.hop_ms,
                    win_ms=template.win_ms,
                    channel_mode=template.channel_mode,
                    feature_kind=template.feature_kind,
                    metadata={
                        **shared,
                        'provenance': Provenance.GENERATED.value,
                        'epoch': str(tag),
                        'scene': scene,
                    },
                )
            )
    return fakes
