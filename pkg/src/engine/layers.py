#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : layers.py
# @Software: Cursor
# @Description: 带参数的层运算: linear / batchnorm / dropout / softmax_xent
import dataclasses

from typing import Iterator

import numpy as np

from src.common.enums import Mode
from src.core.conf import settings
from src.core.exceptions import errors
from src.engine import functional as F
from src.engine.tensor import Context, Function, Tensor


@dataclasses.dataclass
class LayerParams:
    """
    单层参数

    weight/bias 用于卷积和全连接; weight_hh/bias_hh 是循环层的隐状态权重;
    scale/shift/running_mean/running_var 是 batchnorm 的仿射参数与滑动统计量。
    """
    weight: Tensor | None = None
    bias: Tensor | None = None
    weight_hh: Tensor | None = None
    bias_hh: Tensor | None = None
    scale: Tensor | None = None
    shift: Tensor | None = None
    running_mean: np.ndarray | None = None
    running_var: np.ndarray | None = None
    mode: Mode = Mode.TRAIN

    def __post_init__(self) -> None:
        if self.running_var is not None and np.any(self.running_var <= 0):
            raise errors.ConfigError(msg='running variance 必须严格为正')

    def tensors(self) -> Iterator[tuple[str, Tensor]]:
        for name in ('weight', 'bias', 'weight_hh', 'bias_hh', 'scale', 'shift'):
            value = getattr(self, name)
            if value is not None:
                yield name, value

    def buffers(self) -> Iterator[tuple[str, np.ndarray]]:
        for name in ('running_mean', 'running_var'):
            value = getattr(self, name)
            if value is not None:
                yield name, value


def linear(x: Tensor, params: LayerParams) -> Tensor:
    """output = x·W + b, W 布局 (in, out)"""
    weight = params.weight
    if weight is None or x.shape[-1] != weight.shape[0]:
        raise errors.ShapeError(
            msg='全连接输入维度不匹配', data=f'input={x.shape}, weight={None if weight is None else weight.shape}'
        )
    out = F.matmul(x, weight)
    return out + params.bias if params.bias is not None else out


class BatchNormFn(Function):
    op_name = 'batchnorm'

    @staticmethod
    def forward(
        ctx: Context,
        x: np.ndarray,
        scale: np.ndarray,
        shift: np.ndarray,
        *,
        running_mean: np.ndarray,
        running_var: np.ndarray,
        training: bool,
        eps: float,
        momentum: float,
    ) -> np.ndarray:
        axes = (0,) + tuple(range(2, x.ndim))
        view = (1, -1) + (1,) * (x.ndim - 2)
        if training:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            count = x.size // x.shape[1]
            running_mean *= 1 - momentum
            running_mean += momentum * mean
            running_var *= 1 - momentum
            running_var += momentum * var * count / max(count - 1, 1)
        else:
            mean, var = running_mean, running_var
        inv_std = 1.0 / np.sqrt(var + eps)
        x_hat = (x - mean.reshape(view)) * inv_std.reshape(view)
        ctx.save(x_hat, scale, inv_std, axes, view, training)
        return (x_hat * scale.reshape(view) + shift.reshape(view)).astype(x.dtype, copy=False)

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        x_hat, scale, inv_std, axes, view, training = ctx.saved
        grad_scale = (grad * x_hat).sum(axis=axes)
        grad_shift = grad.sum(axis=axes)
        grad_x_hat = grad * scale.reshape(view)
        if not training:
            return grad_x_hat * inv_std.reshape(view), grad_scale, grad_shift
        count = grad.size // grad.shape[1]
        grad_x = (
            count * grad_x_hat
            - grad_x_hat.sum(axis=axes).reshape(view)
            - x_hat * (grad_x_hat * x_hat).sum(axis=axes).reshape(view)
        ) * (inv_std.reshape(view) / count)
        return grad_x, grad_scale, grad_shift


def batchnorm(x: Tensor, params: LayerParams) -> Tensor:
    """
    按通道 (axis 1) 归一化

    train 模式用 batch 统计量并按 momentum 更新滑动统计量; eval 模式用滑动统计量。
    """
    training = params.mode == Mode.TRAIN
    if training and x.shape[0] < 2:
        raise errors.DegenerateBatchError(data=f'train 模式 batchnorm 需要 batch ≥ 2, 得到 {x.shape[0]}')
    if params.scale is None or params.shift is None or params.running_mean is None or params.running_var is None:
        raise errors.ContractError(msg='batchnorm 参数不完整')
    if x.ndim < 2 or x.shape[1] != params.scale.shape[0]:
        raise errors.ShapeError(msg='batchnorm 通道数不匹配', data=f'input={x.shape}, channels={params.scale.shape}')
    return BatchNormFn.apply(
        x,
        params.scale,
        params.shift,
        running_mean=params.running_mean,
        running_var=params.running_var,
        training=training,
        eps=settings.BN_EPS,
        momentum=settings.BN_MOMENTUM,
    )


class DropoutFn(Function):
    op_name = 'dropout'

    @staticmethod
    def forward(ctx: Context, x: np.ndarray, *, mask: np.ndarray) -> np.ndarray:
        ctx.save(mask)
        return x * mask

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        (mask,) = ctx.saved
        return (grad * mask,)


def dropout(x: Tensor, p: float, mode: Mode, rng: np.random.Generator) -> Tensor:
    """inverted dropout: train 模式以概率 p 置零并把保留元素放大 1/(1−p), eval 模式恒等"""
    if not 0.0 <= p < 1.0:
        raise errors.ConfigError(msg='dropout 概率必须在 [0, 1) 内', data=f'p={p}')
    if mode == Mode.EVAL or p == 0.0:
        return x
    mask = (rng.random(x.shape) >= p).astype(x.dtype) / x.dtype.type(1.0 - p)
    return DropoutFn.apply(x, mask=mask)


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    """减最大值的数值稳定 softmax (不参与求导)"""
    shifted = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


class SoftmaxXentFn(Function):
    op_name = 'softmax_xent'

    @staticmethod
    def forward(ctx: Context, logits: np.ndarray, *, target: np.ndarray, reduction: str) -> np.ndarray:
        log_probs = log_softmax(logits)
        rows = np.arange(logits.shape[0])
        losses = -log_probs[rows, target]
        ctx.save(np.exp(log_probs), rows, target, reduction)
        return losses.sum() if reduction == 'sum' else losses.mean()

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        probs, rows, target, reduction = ctx.saved
        delta = probs.copy()
        delta[rows, target] -= 1
        if reduction == 'mean':
            delta /= len(rows)
        return (grad * delta,)


def softmax_xent(logits: Tensor, target: int | np.ndarray, reduction: str = 'mean') -> tuple[Tensor, Tensor]:
    """
    softmax 交叉熵

    :param logits: (batch, classes) 或单个 (classes,) 向量
    :param target: 类别下标, 标量或 (batch,)
    :param reduction: 'mean' 或 'sum', 对 batch 内逐样本损失汇总
    :return: (probs, loss)
    """
    if logits.ndim == 1:
        logits = F.reshape(logits, (1, -1))
    target = np.atleast_1d(np.asarray(target, dtype=np.int64))
    if target.shape != (logits.shape[0],):
        raise errors.ShapeError(msg='标签数量与 batch 不一致', data=f'logits={logits.shape}, target={target.shape}')
    if np.any(target < 0) or np.any(target >= logits.shape[1]):
        raise errors.InputError(msg='标签超出类别范围', data=f'classes={logits.shape[1]}')
    if reduction not in ('mean', 'sum'):
        raise errors.ConfigError(msg='未知的 reduction', data=reduction)
    probs = Tensor(softmax(logits.data), dtype=logits.dtype)
    return probs, SoftmaxXentFn.apply(logits, target=target, reduction=reduction)
