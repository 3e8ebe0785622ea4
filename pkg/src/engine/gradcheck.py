#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : gradcheck.py
# @Software: Cursor
# @Description: 中心有限差分梯度检查
import dataclasses

from typing import Callable, Sequence

import numpy as np

from src.common.logger import log
from src.engine.tensor import Tape, Tensor, backward


@dataclasses.dataclass
class GradCheckResult:
    """梯度检查结果"""
    max_rel_error: float
    checked: int
    worst: str

    def passed(self, tol: float) -> bool:
        return self.max_rel_error < tol


def relative_error(analytic: float, numeric: float, floor: float) -> float:
    """|a − n| / max(|a|, |n|, floor), floor 防止接近 0 的梯度放大噪声"""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def gradcheck(
    fn: Callable[[], Tensor],
    inputs: Sequence[Tensor] | dict[str, Tensor],
    rng: np.random.Generator | None = None,
    n_coords: int = 20,
    eps: float = 1e-6,
    floor: float = 1e-3,
    before_eval: Callable[[], None] | None = None,
) -> GradCheckResult:
    """
    对比反向传播梯度与中心有限差分

    :param fn: 无参闭包, 返回标量损失; 会被多次调用
    :param inputs: 需要检查的张量 (requires_grad=True), 可带名称
    :param n_coords: 每个张量抽查的坐标数 (不超过元素个数)
    :param eps: 差分步长, 建议在 float64 下使用
    :param before_eval: 每次求值前调用, 用于重置 dropout 随机流等
    :return: 最大相对误差与对应坐标
    """
    rng = rng or np.random.default_rng(0)
    named = dict(inputs) if isinstance(inputs, dict) else {str(i): t for i, t in enumerate(inputs)}

    def evaluate() -> Tensor:
        if before_eval is not None:
            before_eval()
        return fn()

    for tensor in named.values():
        tensor.grad = None
    with Tape():
        loss = evaluate()
    backward(loss)

    worst, worst_error, checked = '', 0.0, 0
    for name, tensor in named.items():
        analytic_grad = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
        flat_indices = rng.choice(tensor.size, size=min(n_coords, tensor.size), replace=False)
        for flat in flat_indices:
            index = np.unravel_index(int(flat), tensor.shape)
            original = tensor.data[index].copy()
            tensor.data[index] = original + eps
            plus = evaluate().item()
            tensor.data[index] = original - eps
            minus = evaluate().item()
            tensor.data[index] = original
            numeric = (plus - minus) / (2 * eps)
            error = relative_error(float(analytic_grad[index]), numeric, floor)
            checked += 1
            if error >= worst_error:
                worst, worst_error = f'{name}{list(index)}', error
    log.debug(f'gradcheck: {checked} 个坐标, 最大相对误差 {worst_error:.3e} @ {worst}')
    return GradCheckResult(max_rel_error=worst_error, checked=checked, worst=worst)
