#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : __init__.py
# @Software: Cursor
# @Description: 最小反向模式自动微分引擎
from src.engine import functional  # noqa: F401  注册 Tensor 运算符
from src.engine.conv import conv, conv_transpose, global_avg_pool, maxpool
from src.engine.functional import grad_reverse, relu
from src.engine.gradcheck import GradCheckResult, gradcheck
from src.engine.layers import LayerParams, batchnorm, dropout, linear, log_softmax, softmax, softmax_xent
from src.engine.recurrent import RecurrentOutput, recurrent_cell
from src.engine.spectral import dct1d, idct1d
from src.engine.tensor import Tape, Tensor, backward, current_tape, default_dtype, get_default_dtype, no_tape

__all__ = [
    'GradCheckResult',
    'LayerParams',
    'RecurrentOutput',
    'Tape',
    'Tensor',
    'backward',
    'batchnorm',
    'conv',
    'conv_transpose',
    'current_tape',
    'dct1d',
    'default_dtype',
    'dropout',
    'get_default_dtype',
    'global_avg_pool',
    'grad_reverse',
    'gradcheck',
    'idct1d',
    'linear',
    'log_softmax',
    'maxpool',
    'no_tape',
    'recurrent_cell',
    'relu',
    'softmax',
    'softmax_xent',
]
