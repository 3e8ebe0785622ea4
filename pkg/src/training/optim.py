#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : optim.py
# @Software: Cursor
# @Description: Adam 优化器与早停
import dataclasses

from typing import Iterable

import numpy as np

from src.common.logger import log
from src.core.conf import settings
from src.core.exceptions import errors
from src.engine.tensor import Tensor


@dataclasses.dataclass
class AdamState:
    """每个参数的一阶/二阶矩, 形状与参数一致"""
    step: int = 0
    m: dict[str, np.ndarray] = dataclasses.field(default_factory=dict)
    v: dict[str, np.ndarray] = dataclasses.field(default_factory=dict)


def adam_step(
    params: Iterable[tuple[str, Tensor]],
    state: AdamState,
    lr: float,
    beta1: float = settings.ADAM_BETA1,
    beta2: float = settings.ADAM_BETA2,
    eps: float = settings.ADAM_EPS,
) -> None:
    """
    带偏差校正的 Adam 更新, 就地修改参数

    grad 为 None 的参数跳过; 任一梯度含非有限值时不做任何更新并报错。
    """
    named = [(name, p) for name, p in params if p.grad is not None]
    for name, p in named:
        if not np.all(np.isfinite(p.grad)):
            raise errors.TrainingError(msg='梯度出现非有限值', data=name)
    state.step += 1
    correction1 = 1.0 - beta1 ** state.step
    correction2 = 1.0 - beta2 ** state.step
    for name, p in named:
        grad = p.grad.astype(np.float64)
        m = state.m.setdefault(name, np.zeros(p.shape))
        v = state.v.setdefault(name, np.zeros(p.shape))
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad * grad
        update = lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
        p.data = (p.data - update).astype(p.dtype)


class Adam:
    """按名称管理一组参数的 Adam 状态"""

    def __init__(
        self,
        params: Iterable[tuple[str, Tensor]],
        lr: float = settings.ADAM_LR,
        beta1: float = settings.ADAM_BETA1,
        beta2: float = settings.ADAM_BETA2,
        eps: float = settings.ADAM_EPS,
    ) -> None:
        self.params = list(params)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.state = AdamState()

    def zero_grad(self) -> None:
        for _, p in self.params:
            p.grad = None

    def step(self) -> None:
        adam_step(self.params, self.state, self.lr, self.beta1, self.beta2, self.eps)


class EarlyStopping:
    """
    验证损失连续 patience 个 epoch 未下降时停止

    连续 decay_patience 个 epoch 未下降时学习率乘以 decay_factor (不低于 lr_floor)。
    """

    def __init__(self, patience: int, decay_patience: int, decay_factor: float, lr_floor: float) -> None:
        self.patience = patience
        self.decay_patience = decay_patience
        self.decay_factor = decay_factor
        self.lr_floor = lr_floor
        self.best_loss = float('inf')
        self.best_epoch = 0
        self.counter = 0
        self.early_stop = False

    def __call__(self, val_loss: float, epoch: int, optimizer: Adam) -> bool:
        """记录一个 epoch, 返回该 epoch 是否为新的最优"""
        if val_loss < self.best_loss:
            self.best_loss, self.best_epoch, self.counter = val_loss, epoch, 0
            return True
        self.counter += 1
        if self.counter % self.decay_patience == 0 and optimizer.lr > self.lr_floor:
            optimizer.lr = max(optimizer.lr * self.decay_factor, self.lr_floor)
            log.info(f'验证损失 {self.counter} 个 epoch 未下降, 学习率降为 {optimizer.lr:.2e}')
        if self.counter >= self.patience:
            self.early_stop = True
        return False
