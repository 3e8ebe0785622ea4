#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : functional.py
# @Software: Cursor
# @Description: 逐元素与形状类可微运算, 以及 Tensor 的运算符重载
from typing import Any, Sequence

import numpy as np

from src.engine.tensor import Context, Function, Tensor

Operand = Tensor | float | int | np.ndarray


def as_tensor(value: Operand, like: Tensor | None = None) -> Tensor:
    """常量转 Tensor, 精度跟随参照张量"""
    if isinstance(value, Tensor):
        return value
    return Tensor(value, dtype=like.dtype if like is not None else None)


def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """把广播后的梯度求和回原始形状"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Add(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        ctx.save(a.shape, b.shape)
        return a + b

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        a_shape, b_shape = ctx.saved
        return unbroadcast(grad, a_shape), unbroadcast(grad, b_shape)


class Sub(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        ctx.save(a.shape, b.shape)
        return a - b

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        a_shape, b_shape = ctx.saved
        return unbroadcast(grad, a_shape), unbroadcast(-grad, b_shape)


class Mul(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        ctx.save(a, b)
        return a * b

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        a, b = ctx.saved
        return unbroadcast(grad * b, a.shape), unbroadcast(grad * a, b.shape)


class Div(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        ctx.save(a, b)
        return a / b

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        a, b = ctx.saved
        return unbroadcast(grad / b, a.shape), unbroadcast(-grad * a / (b * b), b.shape)


class Neg(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray) -> np.ndarray:
        return -a

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        return (-grad,)


class Pow(Function):
    """标量指数幂"""

    @staticmethod
    def forward(ctx: Context, a: np.ndarray, *, exponent: float) -> np.ndarray:
        ctx.save(a, exponent)
        return a ** exponent

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        a, exponent = ctx.saved
        return (grad * exponent * a ** (exponent - 1),)


class MatMul(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        ctx.save(a, b)
        return a @ b

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        a, b = ctx.saved
        grad_a = grad @ np.swapaxes(b, -1, -2)
        grad_b = np.swapaxes(a, -1, -2) @ grad
        return unbroadcast(grad_a, a.shape), unbroadcast(grad_b, b.shape)


def _normalize_axes(axis: int | Sequence[int] | None, ndim: int) -> tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(sorted(a % ndim for a in axis))


class Sum(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, *, axis: Any = None, keepdims: bool = False) -> np.ndarray:
        axes = _normalize_axes(axis, a.ndim)
        ctx.save(a.shape, axes, keepdims)
        return a.sum(axis=axes, keepdims=keepdims)

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        shape, axes, keepdims = ctx.saved
        if not keepdims:
            grad = np.expand_dims(grad, axes)
        return (np.array(np.broadcast_to(grad, shape)),)


class Reshape(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, *, shape: tuple[int, ...]) -> np.ndarray:
        ctx.save(a.shape)
        return a.reshape(shape)

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        (shape,) = ctx.saved
        return (grad.reshape(shape),)


class Transpose(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, *, axes: tuple[int, ...]) -> np.ndarray:
        ctx.save(axes)
        return np.transpose(a, axes)

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        (axes,) = ctx.saved
        return (np.transpose(grad, np.argsort(axes)),)


class Concat(Function):
    @staticmethod
    def forward(ctx: Context, *arrays: np.ndarray, axis: int) -> np.ndarray:
        ctx.save(axis, np.cumsum([a.shape[axis] for a in arrays])[:-1])
        return np.concatenate(arrays, axis=axis)

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        axis, offsets = ctx.saved
        return tuple(np.split(grad, offsets, axis=axis))


class Stack(Function):
    @staticmethod
    def forward(ctx: Context, *arrays: np.ndarray, axis: int) -> np.ndarray:
        ctx.save(axis, len(arrays))
        return np.stack(arrays, axis=axis)

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        axis, count = ctx.saved
        return tuple(np.take(grad, i, axis=axis) for i in range(count))


class GetItem(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, *, index: Any) -> np.ndarray:
        ctx.save(a.shape, a.dtype, index)
        return np.array(a[index])

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        shape, dtype, index = ctx.saved
        full = np.zeros(shape, dtype=dtype)
        np.add.at(full, index, grad)
        return (full,)


class Exp(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray) -> np.ndarray:
        out = np.exp(a)
        ctx.save(out)
        return out

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        (out,) = ctx.saved
        return (grad * out,)


class Log(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray) -> np.ndarray:
        ctx.save(a)
        return np.log(a)

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        (a,) = ctx.saved
        return (grad / a,)


class Sigmoid(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray) -> np.ndarray:
        e = np.exp(-np.abs(a))
        out = np.where(a >= 0, 1.0 / (1.0 + e), e / (1.0 + e)).astype(a.dtype, copy=False)
        ctx.save(out)
        return out

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        (out,) = ctx.saved
        return (grad * out * (1.0 - out),)


class Tanh(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray) -> np.ndarray:
        out = np.tanh(a)
        ctx.save(out)
        return out

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        (out,) = ctx.saved
        return (grad * (1.0 - out * out),)


class ReLU(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray) -> np.ndarray:
        mask = a > 0
        ctx.save(mask)
        return np.where(mask, a, 0).astype(a.dtype, copy=False)

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        (mask,) = ctx.saved
        return (grad * mask,)


class Clamp(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, *, low: float | None, high: float | None) -> np.ndarray:
        mask = np.ones(a.shape, dtype=bool)
        if low is not None:
            mask &= a >= low
        if high is not None:
            mask &= a <= high
        ctx.save(mask)
        return np.clip(a, low, high)

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        (mask,) = ctx.saved
        return (grad * mask,)


class GradReverse(Function):
    """前向恒等, 反向乘以 -lambda"""
    op_name = 'grad_reverse'

    @staticmethod
    def forward(ctx: Context, a: np.ndarray, *, scale: float) -> np.ndarray:
        ctx.save(scale)
        return a.copy()

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        (scale,) = ctx.saved
        return (-scale * grad,)


def add(a: Operand, b: Operand) -> Tensor:
    a = as_tensor(a, b if isinstance(b, Tensor) else None)
    return Add.apply(a, as_tensor(b, a))


def sub(a: Operand, b: Operand) -> Tensor:
    a = as_tensor(a, b if isinstance(b, Tensor) else None)
    return Sub.apply(a, as_tensor(b, a))


def mul(a: Operand, b: Operand) -> Tensor:
    a = as_tensor(a, b if isinstance(b, Tensor) else None)
    return Mul.apply(a, as_tensor(b, a))


def div(a: Operand, b: Operand) -> Tensor:
    a = as_tensor(a, b if isinstance(b, Tensor) else None)
    return Div.apply(a, as_tensor(b, a))


def neg(a: Tensor) -> Tensor:
    return Neg.apply(a)


def power(a: Tensor, exponent: float) -> Tensor:
    return Pow.apply(a, exponent=exponent)


def square(a: Tensor) -> Tensor:
    return Mul.apply(a, a)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    return MatMul.apply(a, b)


def sum(a: Tensor, axis: int | Sequence[int] | None = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    return Sum.apply(a, axis=axis, keepdims=keepdims)


def mean(a: Tensor, axis: int | Sequence[int] | None = None, keepdims: bool = False) -> Tensor:
    count = int(np.prod([a.shape[i] for i in _normalize_axes(axis, a.ndim)]))
    return div(sum(a, axis=axis, keepdims=keepdims), count)


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    return Reshape.apply(a, shape=tuple(shape))


def flatten(a: Tensor) -> Tensor:
    """保留 batch 维, 其余展平"""
    return reshape(a, (a.shape[0], -1))


def transpose(a: Tensor, axes: Sequence[int]) -> Tensor:
    return Transpose.apply(a, axes=tuple(axes))


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    return Concat.apply(*tensors, axis=axis)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    return Stack.apply(*tensors, axis=axis)


def getitem(a: Tensor, index: Any) -> Tensor:
    return GetItem.apply(a, index=index)


def exp(a: Tensor) -> Tensor:
    return Exp.apply(a)


def log(a: Tensor) -> Tensor:
    return Log.apply(a)


def sigmoid(a: Tensor) -> Tensor:
    return Sigmoid.apply(a)


def tanh(a: Tensor) -> Tensor:
    return Tanh.apply(a)


def relu(a: Tensor) -> Tensor:
    """max(0, x), 0 处次梯度取 0"""
    return ReLU.apply(a)


def clamp(a: Tensor, low: float | None = None, high: float | None = None) -> Tensor:
    return Clamp.apply(a, low=low, high=high)


def grad_reverse(a: Tensor, lam: float = 1.0) -> Tensor:
    """梯度反转层"""
    return GradReverse.apply(a, scale=lam)


Tensor.__add__ = add  # type: ignore[method-assign]
Tensor.__radd__ = lambda self, other: add(other, self)  # type: ignore[attr-defined]
Tensor.__sub__ = sub  # type: ignore[attr-defined]
Tensor.__rsub__ = lambda self, other: sub(other, self)  # type: ignore[attr-defined]
Tensor.__mul__ = mul  # type: ignore[attr-defined]
Tensor.__rmul__ = lambda self, other: mul(other, self)  # type: ignore[attr-defined]
Tensor.__truediv__ = div  # type: ignore[attr-defined]
Tensor.__rtruediv__ = lambda self, other: div(other, self)  # type: ignore[attr-defined]
Tensor.__neg__ = neg  # type: ignore[attr-defined]
Tensor.__pow__ = power  # type: ignore[attr-defined]
Tensor.__matmul__ = matmul  # type: ignore[attr-defined]
Tensor.__getitem__ = getitem  # type: ignore[attr-defined]
Tensor.sum = sum  # type: ignore[attr-defined]
Tensor.mean = mean  # type: ignore[attr-defined]
Tensor.reshape = reshape  # type: ignore[attr-defined]
Tensor.transpose = transpose  # type: ignore[attr-defined]
