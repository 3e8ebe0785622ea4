#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : recurrent.py
# @Software: Cursor
# @Description: LSTM / GRU 循环单元, 由基础运算组合而成
"""
循环单元

输入布局 (batch, time, features)。门的排列:
LSTM 为 (i, f, g, o), GRU 为 (r, z, n)。GRU 更新规则 h' = z ⊙ n + (1 − z) ⊙ h,
即更新门为 1 时隐状态等于候选激活。
"""
import dataclasses

import numpy as np

from src.common.enums import RecurrentKind
from src.core.exceptions import errors
from src.engine import functional as F
from src.engine.layers import LayerParams
from src.engine.tensor import Tensor

GATES = {RecurrentKind.LSTM: 4, RecurrentKind.GRU: 3}


@dataclasses.dataclass
class RecurrentOutput:
    """循环层输出"""
    sequence: Tensor
    hidden: Tensor
    cell: Tensor | None = None


def _gate(t: Tensor, index: int, hidden: int) -> Tensor:
    return F.getitem(t, (slice(None), slice(index * hidden, (index + 1) * hidden)))


def recurrent_cell(
    kind: RecurrentKind,
    input_seq: Tensor,
    params: LayerParams,
    h0: Tensor | None = None,
    c0: Tensor | None = None,
) -> RecurrentOutput:
    """
    展开一层循环网络

    :param kind: LSTM 或 GRU
    :param input_seq: (batch, time, features)
    :param params: weight (features, G·H), weight_hh (H, G·H), bias/bias_hh (G·H,)
    :return: 全部隐状态序列 (batch, time, H) 与最终状态
    """
    kind = RecurrentKind(kind)
    if input_seq.ndim != 3:
        raise errors.ShapeError(msg='循环层输入应为 (batch, time, features)', data=f'shape={input_seq.shape}')
    if params.weight is None or params.weight_hh is None:
        raise errors.ContractError(msg='循环层参数不完整')
    hidden = params.weight_hh.shape[0]
    if params.weight.shape[0] != input_seq.shape[2] or params.weight.shape[1] != GATES[kind] * hidden:
        raise errors.ShapeError(
            msg='循环层权重与输入不匹配', data=f'input={input_seq.shape}, weight={params.weight.shape}'
        )
    batch, steps = input_seq.shape[0], input_seq.shape[1]
    if h0 is None:
        h0 = Tensor(np.zeros((batch, hidden)), dtype=input_seq.dtype)
    projected = F.matmul(input_seq, params.weight)
    if params.bias is not None:
        projected = projected + params.bias

    h = h0
    c = c0
    if kind == RecurrentKind.LSTM and c is None:
        c = Tensor(np.zeros((batch, hidden)), dtype=input_seq.dtype)
    outputs: list[Tensor] = []
    for t in range(steps):
        x_t = F.getitem(projected, (slice(None), t))
        h_t = F.matmul(h, params.weight_hh)
        if params.bias_hh is not None:
            h_t = h_t + params.bias_hh
        if kind == RecurrentKind.LSTM:
            gates = x_t + h_t
            i = F.sigmoid(_gate(gates, 0, hidden))
            f = F.sigmoid(_gate(gates, 1, hidden))
            g = F.tanh(_gate(gates, 2, hidden))
            o = F.sigmoid(_gate(gates, 3, hidden))
            c = f * c + i * g
            h = o * F.tanh(c)
        else:
            r = F.sigmoid(_gate(x_t, 0, hidden) + _gate(h_t, 0, hidden))
            z = F.sigmoid(_gate(x_t, 1, hidden) + _gate(h_t, 1, hidden))
            n = F.tanh(_gate(x_t, 2, hidden) + r * _gate(h_t, 2, hidden))
            h = z * n + (1.0 - z) * h
        outputs.append(h)
    return RecurrentOutput(sequence=F.stack(outputs, axis=1), hidden=h, cell=c)
