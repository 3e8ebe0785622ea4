#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : network.py
# @Software: Cursor
# @Description: 分类网络基类与帧级结果汇总
"""
分类网络

逐帧网络输入 (batch, c, n), 片段级网络输入 (batch, L, c, n)。
所有网络在第一层之前按 (通道, 滤波器) 做标准化, 均值/标准差是 buffer, 随 checkpoint 保存。
"""
import numpy as np

from src.common.dataclasses import PredictionRecord
from src.core.exceptions import errors
from src.engine.layers import log_softmax, softmax, softmax_xent
from src.engine.module import Module, Shape
from src.engine.tensor import Tensor, get_default_dtype, no_tape
from src.models.spec import HEAD_FRAME_WISE, LayerSpec, NetworkSpec

STD_FLOOR = 1e-6


class Network(Module):
    """分类网络基类, 子类实现 heads()"""

    def __init__(self, spec: NetworkSpec) -> None:
        super().__init__(spec.variant)
        self.spec = spec
        _, channels, filters = spec.input_shape
        dtype = get_default_dtype()
        self.register_buffer('input_mean', np.zeros((channels, filters), dtype=dtype))
        self.register_buffer('input_std', np.ones((channels, filters), dtype=dtype))

    @property
    def frame_wise(self) -> bool:
        return self.spec.head == HEAD_FRAME_WISE

    @property
    def sample_shape(self) -> Shape:
        frames, channels, filters = self.spec.input_shape
        return (channels, filters) if self.frame_wise else (frames, channels, filters)

    @property
    def has_city_branch(self) -> bool:
        return self.spec.n_cities > 0

    def finalize(self, records: list[LayerSpec]) -> None:
        """构建完成后登记逐层形状轨迹"""
        self.spec.layers = records

    def fit_standardization(self, features: np.ndarray) -> None:
        """按 (通道, 滤波器) 统计训练特征的均值与标准差"""
        axes = tuple(range(features.ndim - 2))
        self.set_buffer('input_mean', features.mean(axis=axes))
        self.set_buffer('input_std', np.maximum(features.std(axis=axes), STD_FLOOR))

    def standardize(self, x: Tensor) -> Tensor:
        return (x - self.input_mean) / self.input_std

    def check_input(self, x: Tensor) -> None:
        if tuple(x.shape[1:]) != self.sample_shape:
            raise errors.ShapeError(
                msg=f'{self.spec.variant}: 输入形状不匹配', data=f'input={x.shape}, 需要 (batch,) + {self.sample_shape}'
            )

    def heads(self, x: Tensor) -> tuple[Tensor, Tensor | None]:
        """标准化后的输入 -> (场景 logits, 城市 logits)"""
        raise NotImplementedError

    def forward_heads(self, x: Tensor) -> tuple[Tensor, Tensor | None]:
        self.check_input(x)
        return self.heads(self.standardize(x))

    def forward(self, x: Tensor) -> Tensor:
        return self.forward_heads(x)[0]

    def loss(self, x: Tensor, labels: np.ndarray, cities: np.ndarray | None = None) -> Tensor:
        """场景交叉熵, 带城市分支时加上城市交叉熵 (逐帧城市标签按片段重复)"""
        scene_logits, city_logits = self.forward_heads(x)
        _, loss = softmax_xent(scene_logits, labels)
        if city_logits is not None:
            if cities is None:
                raise errors.ContractError(msg='城市对抗网络训练需要城市标签')
            cities = np.asarray(cities)
            repeat = city_logits.shape[0] // len(cities)
            _, city_loss = softmax_xent(city_logits, np.repeat(cities, repeat))
            loss = loss + city_loss
        return loss

    def predict_proba(self, x: np.ndarray, batch_size: int = 64) -> np.ndarray:
        """eval 模式、不记录计算带的批量前向, 返回 float64 概率"""
        was_training = self.training
        self.eval()
        outputs = []
        try:
            with no_tape():
                for start in range(0, len(x), batch_size):
                    logits = self.forward(Tensor(x[start:start + batch_size]))
                    outputs.append(softmax(logits.data.astype(np.float64)))
        finally:
            self.train(was_training)
        return np.concatenate(outputs) if outputs else np.zeros((0, self.spec.n_classes))

    def predict_clips(self, features: np.ndarray, batch_size: int = 64) -> np.ndarray:
        """
        片段级概率

        :param features: (clips, L, c, n)
        :return: (clips, classes); 逐帧网络先逐帧预测, 再按 segment_predict 汇总
        """
        if not self.frame_wise:
            return self.predict_proba(features, batch_size)
        clips, frames = features.shape[:2]
        frame_probs = self.predict_proba(features.reshape((clips * frames,) + features.shape[2:]), batch_size)
        frame_probs = frame_probs.reshape(clips, frames, -1)
        return np.stack([aggregate_frames(p) for p in frame_probs])


def aggregate_frames(frame_probs: np.ndarray) -> np.ndarray:
    """逐帧概率 -> 对数概率取平均后重新归一化"""
    frame_probs = np.asarray(frame_probs, dtype=np.float64)
    if frame_probs.ndim != 2 or frame_probs.shape[0] == 0:
        raise errors.InputError(msg='逐帧输出为空', data=f'shape={frame_probs.shape}')
    log_probs = np.log(np.clip(frame_probs, np.finfo(np.float64).tiny, None))
    return softmax(log_softmax(log_probs).mean(axis=0))


def segment_predict(
    frame_probs: np.ndarray,
    clip_id: str = '',
    classifier_id: str = '',
    seed_id: int | None = None,
) -> PredictionRecord:
    """逐帧输出的几何平均, 归一化为片段预测"""
    return PredictionRecord(
        clip_id=clip_id, probs=aggregate_frames(frame_probs), classifier_id=classifier_id, seed_id=seed_id
    )
