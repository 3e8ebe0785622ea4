#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : conv.py
# @Software: Cursor
# @Description: 卷积 / 转置卷积 / 最大池化 / 全局平均池化
"""
空间类运算

张量布局为 (batch, channels, *spatial), dims 取 1 或 2。
卷积是互相关 (不翻转卷积核), 权重布局 (out, in, *kernel); 转置卷积权重布局 (in, out, *kernel)。
"""
import itertools

from typing import Sequence

import numpy as np

from numpy.lib.stride_tricks import sliding_window_view

from src.core.exceptions import errors
from src.engine.tensor import Context, Function, Tensor

_SPATIAL = 'xyz'
_KERNEL = 'ijk'

IntOrSeq = int | Sequence[int]


def as_tuple(value: IntOrSeq, dims: int) -> tuple[int, ...]:
    """把标量参数展开到每个空间轴"""
    if isinstance(value, (int, np.integer)):
        return (int(value),) * dims
    value = tuple(int(v) for v in value)
    if len(value) != dims:
        raise errors.ConfigError(msg='参数维度与 dims 不一致', data=f'{value} vs dims={dims}')
    return value


def conv_extent(extent: int, kernel: int, pad: int, stride: int) -> int:
    """floor((in + 2·pad − k) / stride) + 1"""
    return (extent + 2 * pad - kernel) // stride + 1


def conv_transpose_extent(extent: int, kernel: int, pad: int, stride: int) -> int:
    """(in − 1)·stride − 2·pad + k"""
    return (extent - 1) * stride - 2 * pad + kernel


def _check_rank(x: Tensor, dims: int) -> None:
    if dims not in (1, 2):
        raise errors.ConfigError(msg='只支持 1D/2D 空间运算', data=f'dims={dims}')
    if x.ndim != dims + 2:
        raise errors.ShapeError(msg='输入秩与 dims 不匹配', data=f'shape={x.shape}, dims={dims}')


def _strided(view: np.ndarray, stride: tuple[int, ...]) -> np.ndarray:
    return view[(slice(None), slice(None)) + tuple(slice(None, None, s) for s in stride)]


def _offset_index(offsets: tuple[int, ...], stride: tuple[int, ...], extents: tuple[int, ...]) -> tuple:
    """卷积核偏移 offsets 对应的输入位置切片"""
    return (slice(None), slice(None)) + tuple(
        slice(o, o + s * (n - 1) + 1, s) for o, s, n in zip(offsets, stride, extents)
    )


class ConvFn(Function):
    op_name = 'conv'

    @staticmethod
    def forward(ctx: Context, x: np.ndarray, w: np.ndarray, b: np.ndarray, *, pad: tuple, stride: tuple) -> np.ndarray:
        dims = len(pad)
        sp, kk = _SPATIAL[:dims], _KERNEL[:dims]
        xp = np.pad(x, [(0, 0), (0, 0)] + [(p, p) for p in pad])
        windows = _strided(sliding_window_view(xp, w.shape[2:], axis=tuple(range(2, 2 + dims))), stride)
        out = np.einsum(f'bc{sp}{kk},oc{kk}->bo{sp}', windows, w, optimize=True)
        out += b.reshape((1, -1) + (1,) * dims)
        ctx.save(x.shape, xp.shape, windows, w, pad, stride)
        return out

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        x_shape, xp_shape, windows, w, pad, stride = ctx.saved
        dims = len(pad)
        sp, kk = _SPATIAL[:dims], _KERNEL[:dims]
        grad_w = np.einsum(f'bo{sp},bc{sp}{kk}->oc{kk}', grad, windows, optimize=True)
        grad_b = grad.sum(axis=(0,) + tuple(range(2, 2 + dims)))
        grad_xp = np.zeros(xp_shape, dtype=grad.dtype)
        for offsets in itertools.product(*(range(k) for k in w.shape[2:])):
            kernel_slice = w[(slice(None), slice(None)) + offsets]
            grad_xp[_offset_index(offsets, stride, grad.shape[2:])] += np.einsum(
                f'bo{sp},oc->bc{sp}', grad, kernel_slice
            )
        crop = (slice(None), slice(None)) + tuple(slice(p, p + n) for p, n in zip(pad, x_shape[2:]))
        return grad_xp[crop], grad_w, grad_b


class ConvTransposeFn(Function):
    op_name = 'conv_transpose'

    @staticmethod
    def forward(ctx: Context, x: np.ndarray, w: np.ndarray, b: np.ndarray, *, pad: tuple, stride: tuple) -> np.ndarray:
        dims = len(pad)
        sp = _SPATIAL[:dims]
        kernel = w.shape[2:]
        full = tuple((n - 1) * s + k for n, s, k in zip(x.shape[2:], stride, kernel))
        out = np.zeros((x.shape[0], w.shape[1]) + full, dtype=x.dtype)
        for offsets in itertools.product(*(range(k) for k in kernel)):
            kernel_slice = w[(slice(None), slice(None)) + offsets]
            out[_offset_index(offsets, stride, x.shape[2:])] += np.einsum(f'bc{sp},co->bo{sp}', x, kernel_slice)
        crop = (slice(None), slice(None)) + tuple(slice(p, f - p) for p, f in zip(pad, full))
        out = out[crop] + b.reshape((1, -1) + (1,) * dims)
        ctx.save(x, w, full, pad, stride)
        return out

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        x, w, full, pad, stride = ctx.saved
        dims = len(pad)
        sp, kk = _SPATIAL[:dims], _KERNEL[:dims]
        grad_full = np.zeros(grad.shape[:2] + full, dtype=grad.dtype)
        grad_full[(slice(None), slice(None)) + tuple(slice(p, f - p) for p, f in zip(pad, full))] = grad
        windows = _strided(sliding_window_view(grad_full, w.shape[2:], axis=tuple(range(2, 2 + dims))), stride)
        grad_x = np.einsum(f'bo{sp}{kk},co{kk}->bc{sp}', windows, w, optimize=True)
        grad_w = np.einsum(f'bc{sp},bo{sp}{kk}->co{kk}', x, windows, optimize=True)
        grad_b = grad.sum(axis=(0,) + tuple(range(2, 2 + dims)))
        return grad_x, grad_w, grad_b


class MaxPoolFn(Function):
    op_name = 'maxpool'

    @staticmethod
    def forward(ctx: Context, x: np.ndarray, *, size: tuple, pad: tuple, stride: tuple) -> np.ndarray:
        dims = len(size)
        xp = np.pad(x, [(0, 0), (0, 0)] + [(p, p) for p in pad], constant_values=-np.inf)
        windows = _strided(sliding_window_view(xp, size, axis=tuple(range(2, 2 + dims))), stride)
        flat = windows.reshape(windows.shape[: 2 + dims] + (-1,))
        argmax = flat.argmax(axis=-1)
        out = np.take_along_axis(flat, argmax[..., None], axis=-1)[..., 0]
        ctx.save(x.shape, xp.shape, argmax, size, pad, stride)
        return out

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        x_shape, xp_shape, argmax, size, pad, stride = ctx.saved
        dims = len(size)
        kernel_pos = np.unravel_index(argmax, size)
        grid = np.indices(argmax.shape, sparse=True)
        index = (grid[0], grid[1]) + tuple(grid[2 + d] * stride[d] + kernel_pos[d] for d in range(dims))
        grad_xp = np.zeros(xp_shape, dtype=grad.dtype)
        np.add.at(grad_xp, index, grad)
        crop = (slice(None), slice(None)) + tuple(slice(p, p + n) for p, n in zip(pad, x_shape[2:]))
        return (grad_xp[crop],)


class GlobalAvgPoolFn(Function):
    op_name = 'global_avg_pool'

    @staticmethod
    def forward(ctx: Context, x: np.ndarray) -> np.ndarray:
        ctx.save(x.shape)
        return x.mean(axis=tuple(range(2, x.ndim)))

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        (shape,) = ctx.saved
        count = int(np.prod(shape[2:]))
        expanded = grad.reshape(grad.shape + (1,) * (len(shape) - 2)) / count
        return (np.array(np.broadcast_to(expanded, shape)),)


def conv(x: Tensor, weight: Tensor, bias: Tensor, dims: int, pad: IntOrSeq = 0, stride: IntOrSeq = 1) -> Tensor:
    """N 维互相关卷积, 每个输出通道加偏置"""
    _check_rank(x, dims)
    pad, stride = as_tuple(pad, dims), as_tuple(stride, dims)
    if weight.ndim != dims + 2 or weight.shape[1] != x.shape[1]:
        raise errors.ShapeError(msg='卷积核通道数与输入不匹配', data=f'input={x.shape}, kernel={weight.shape}')
    extents = [conv_extent(n, k, p, s) for n, k, p, s in zip(x.shape[2:], weight.shape[2:], pad, stride)]
    if min(stride) < 1 or min(extents) < 1:
        raise errors.ConfigError(msg='卷积输出尺寸非正', data=f'input={x.shape}, kernel={weight.shape}, pad={pad}')
    return ConvFn.apply(x, weight, bias, pad=pad, stride=stride)


def conv_transpose(
    x: Tensor, weight: Tensor, bias: Tensor, dims: int, pad: IntOrSeq = 0, stride: IntOrSeq = 1
) -> Tensor:
    """转置卷积, 输出尺寸 (in − 1)·stride − 2·pad + k"""
    _check_rank(x, dims)
    pad, stride = as_tuple(pad, dims), as_tuple(stride, dims)
    if weight.ndim != dims + 2 or weight.shape[0] != x.shape[1]:
        raise errors.ShapeError(msg='转置卷积核通道数与输入不匹配', data=f'input={x.shape}, kernel={weight.shape}')
    extents = [conv_transpose_extent(n, k, p, s) for n, k, p, s in zip(x.shape[2:], weight.shape[2:], pad, stride)]
    if min(stride) < 1 or min(extents) < 1:
        raise errors.ConfigError(msg='转置卷积输出尺寸非正', data=f'input={x.shape}, kernel={weight.shape}')
    return ConvTransposeFn.apply(x, weight, bias, pad=pad, stride=stride)


def maxpool(x: Tensor, dims: int, size: IntOrSeq, pad: IntOrSeq = 0, stride: IntOrSeq | None = None) -> Tensor:
    """最大池化, 填充区域视为 −∞, 反向只把梯度传给最大值位置"""
    _check_rank(x, dims)
    size = as_tuple(size, dims)
    pad = as_tuple(pad, dims)
    stride = as_tuple(stride if stride is not None else size, dims)
    if min(stride) < 1:
        raise errors.ConfigError(msg='池化步长必须 ≥ 1', data=f'stride={stride}')
    if any(p >= k for p, k in zip(pad, size)):
        raise errors.ConfigError(msg='池化填充必须小于窗口', data=f'size={size}, pad={pad}')
    if any(k > n + 2 * p for k, n, p in zip(size, x.shape[2:], pad)):
        raise errors.ConfigError(msg='池化窗口大于填充后的输入', data=f'input={x.shape}, size={size}, pad={pad}')
    return MaxPoolFn.apply(x, size=size, pad=pad, stride=stride)


def global_avg_pool(x: Tensor) -> Tensor:
    """对所有空间轴求平均, 输出 (batch, channels)"""
    if x.ndim < 3:
        raise errors.ShapeError(msg='全局平均池化需要秩 ≥ 3', data=f'shape={x.shape}')
    return GlobalAvgPoolFn.apply(x)
