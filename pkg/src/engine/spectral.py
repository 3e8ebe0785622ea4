#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : spectral.py
# @Software: Cursor
# @Description: 正交 DCT-II 及其逆变换
import numpy as np

from scipy import fft

from src.engine.tensor import Context, Function, Tensor


class DctFn(Function):
    """正交变换的伴随就是其逆变换"""
    op_name = 'dct1d'

    @staticmethod
    def forward(ctx: Context, x: np.ndarray, *, axis: int) -> np.ndarray:
        ctx.save(axis)
        return fft.dct(x, type=2, axis=axis, norm='ortho')

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        (axis,) = ctx.saved
        return (fft.idct(grad, type=2, axis=axis, norm='ortho'),)


class IdctFn(Function):
    op_name = 'idct1d'

    @staticmethod
    def forward(ctx: Context, x: np.ndarray, *, axis: int) -> np.ndarray:
        ctx.save(axis)
        return fft.idct(x, type=2, axis=axis, norm='ortho')

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple:
        (axis,) = ctx.saved
        return (fft.dct(grad, type=2, axis=axis, norm='ortho'),)


def dct1d(x: Tensor, axis: int = -1) -> Tensor:
    """沿 axis 的正交 DCT-II"""
    return DctFn.apply(x, axis=axis)


def idct1d(x: Tensor, axis: int = -1) -> Tensor:
    """dct1d 的逆"""
    return IdctFn.apply(x, axis=axis)
