#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import dataclasses

import numpy as np

from src.common.enums import ChannelMode, FeatureKind, Fold, Provenance
from src.core.exceptions import errors


@dataclasses.dataclass
class Clip:
    """音频片段记录"""
    id: str
    path: str
    scene: str
    city: str
    provenance: Provenance = Provenance.REAL
    duration: float = 0.0
    fold: Fold | None = None


@dataclasses.dataclass
class FeatureMap:
    """
    特征图, data 布局为 frames(L) × channels(c) × filters(n)

    metadata 保持插入顺序, 写入特征缓存的 key=value 尾部。
    """
    data: np.ndarray
    hop_ms: float
    win_ms: float
    channel_mode: ChannelMode
    feature_kind: FeatureKind
    metadata: dict[str, str] = dataclasses.field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.data.ndim != 3:
            raise errors.ShapeError(msg='特征图必须是 L × c × n', data=f'shape={self.data.shape}')

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape  # type: ignore[return-value]

    @property
    def frames(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[1]

    @property
    def filters(self) -> int:
        return self.data.shape[2]

    def replace(self, **changes: object) -> 'FeatureMap':
        return dataclasses.replace(self, **changes)


@dataclasses.dataclass
class PredictionRecord:
    """单个片段的预测"""
    clip_id: str
    probs: np.ndarray
    classifier_id: str
    seed_id: int | None = None

    @property
    def label(self) -> int:
        """argmax, 并列时取最小类别下标"""
        return int(np.argmax(self.probs))
