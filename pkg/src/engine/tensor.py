#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : tensor.py
# @Software: Cursor
# @Description: 反向模式自动微分: Tensor / Tape / Function
"""
反向模式自动微分核心

只有在 ``with Tape():`` 块内, 且至少一个输入 requires_grad 时, 运算才会被记录到计算带上;
块外的前向计算(推理、评估)不产生任何记录。一个 Tape 只允许单个线程写入。
"""
import itertools

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Any, Iterator

import numpy as np

from src.core.conf import settings
from src.core.exceptions import errors

_default_dtype: ContextVar[np.dtype] = ContextVar('default_dtype', default=np.dtype(settings.ENGINE_DTYPE))
_current_tape: ContextVar['Tape | None'] = ContextVar('current_tape', default=None)


def get_default_dtype() -> np.dtype:
    """当前默认浮点精度"""
    return _default_dtype.get()


@contextmanager
def default_dtype(dtype: str | np.dtype) -> Iterator[None]:
    """临时切换默认浮点精度 (梯度检查用 float64)"""
    token = _default_dtype.set(np.dtype(dtype))
    try:
        yield
    finally:
        _default_dtype.reset(token)


def current_tape() -> 'Tape | None':
    """当前激活的计算带"""
    return _current_tape.get()


@contextmanager
def no_tape() -> Iterator[None]:
    """块内暂停记录, 用于推理与生成"""
    token = _current_tape.set(None)
    try:
        yield
    finally:
        _current_tape.reset(token)


class Context:
    """前向传递留给反向传递的上下文"""

    def __init__(self) -> None:
        self.saved: tuple[Any, ...] = ()

    def save(self, *values: Any) -> None:
        self.saved = values


class Tensor:
    """
    N 维数组 + 可选梯度槽

    浮点数据默认转换为当前默认精度; 显式给出 dtype 时保持该精度。
    """
    # numpy 与 Tensor 混合运算时交给 Tensor 的反射运算符
    __array_ufunc__ = None

    def __init__(self, data: Any, requires_grad: bool = False, dtype: str | np.dtype | None = None):
        if isinstance(data, Tensor):
            data = data.data
        array = np.asarray(data)
        self.data: np.ndarray = array.astype(dtype or get_default_dtype(), copy=False)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.node_id: int | None = None
        self.tape: Tape | None = None
        # 产生该张量的计算带与记录序号, 叶子张量为 None
        self.producer: Tape | None = None
        self.record_index: int | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return self.producer is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> 'Tensor':
        """脱离计算带的副本, 可在线程间传递"""
        return Tensor(self.data.copy(), dtype=self.data.dtype)

    def zero_grad(self) -> None:
        self.grad = None

    def __len__(self) -> int:
        return self.data.shape[0]

    def __repr__(self) -> str:
        return f'Tensor(shape={self.shape}, dtype={self.dtype}, requires_grad={self.requires_grad})'


@dataclass
class TapeRecord:
    """一条运算记录"""
    op: str
    fn: type['Function']
    inputs: tuple[Tensor, ...]
    input_ids: tuple[int, ...]
    ctx: Context
    output_id: int


class Tape:
    """按拓扑顺序追加的运算记录"""

    def __init__(self) -> None:
        self.records: list[TapeRecord] = []
        self._ids = itertools.count()
        self._token = None

    def __enter__(self) -> 'Tape':
        self._token = _current_tape.set(self)
        return self

    def __exit__(self, *exc: object) -> None:
        _current_tape.reset(self._token)
        self._token = None

    def __len__(self) -> int:
        return len(self.records)

    def register(self, tensor: Tensor) -> int:
        """为张量分配本计算带内的节点编号"""
        if tensor.tape is not self or tensor.node_id is None:
            tensor.tape = self
            tensor.node_id = next(self._ids)
        return tensor.node_id

    def record(self, fn: type['Function'], inputs: tuple[Tensor, ...], ctx: Context, out: Tensor) -> None:
        input_ids = tuple(self.register(t) for t in inputs)
        out.tape = self
        out.node_id = next(self._ids)
        out.producer = self
        out.record_index = len(self.records)
        self.records.append(
            TapeRecord(op=fn.op_name or fn.__name__, fn=fn, inputs=inputs, input_ids=input_ids, ctx=ctx,
                       output_id=out.node_id)
        )

    def clear(self) -> None:
        self.records.clear()


class Function:
    """
    可微运算基类

    forward/backward 只处理 numpy 数组; 位置参数必须是 Tensor, 不可微的参数通过关键字传入。
    backward 返回与位置参数一一对应的梯度元组, 不需要的梯度返回 None。
    """
    op_name: str = ''

    @staticmethod
    def forward(ctx: Context, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError

    @staticmethod
    def backward(ctx: Context, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *inputs: Tensor, **kwargs: Any) -> Tensor:
        ctx = Context()
        out_data = np.asarray(cls.forward(ctx, *(t.data for t in inputs), **kwargs))
        tape = _current_tape.get()
        needs_grad = tape is not None and any(t.requires_grad for t in inputs)
        out = Tensor(out_data, requires_grad=needs_grad, dtype=out_data.dtype)
        if needs_grad:
            tape.record(cls, inputs, ctx, out)  # type: ignore[union-attr]
        return out


def backward(loss: Tensor) -> None:
    """
    从标量损失反向传播

    每条记录至多访问一次; 叶子张量 (requires_grad=True) 的 grad 上累加 dLoss/dTensor,
    同一张量被多次使用时梯度求和。
    """
    if loss.size != 1:
        raise errors.ContractError(msg='backward 需要标量损失', data=f'shape={loss.shape}')
    tape = loss.producer
    if tape is None or loss.record_index is None or loss.node_id is None:
        raise errors.ContractError(msg='损失不在任何计算带上', data='forward 需在 `with Tape():` 内执行')

    grads: dict[int, np.ndarray] = {loss.node_id: np.ones_like(loss.data)}
    leaves: dict[int, Tensor] = {}
    for record in reversed(tape.records[: loss.record_index + 1]):
        grad = grads.pop(record.output_id, None)
        if grad is None:
            continue
        input_grads = record.fn.backward(record.ctx, grad)
        for tensor, node_id, input_grad in zip(record.inputs, record.input_ids, input_grads):
            if input_grad is None or not tensor.requires_grad:
                continue
            grads[node_id] = grads[node_id] + input_grad if node_id in grads else input_grad
            if tensor.producer is not tape:
                leaves[node_id] = tensor

    for node_id, tensor in leaves.items():
        grad = np.asarray(grads[node_id], dtype=tensor.dtype).reshape(tensor.shape)
        tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad
