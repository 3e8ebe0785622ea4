#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : module.py
# @Software: Cursor
# @Description: 模块基类与基础层
"""
模块系统

Module 通过属性赋值自动登记子模块与 LayerParams; 参数名形如 ``block1.conv.weight``。
output_shape 按单个样本 (不含 batch 维) 推导形状, 构建网络时逐层校验。
"""
import importlib
import math

from typing import Any, Iterable, Iterator, Sequence

import numpy as np

from src.common.enums import Mode, RecurrentKind
from src.core.exceptions import errors
C = importlib.import_module('src.engine.conv')  # 子模块; 包内同名函数 conv 会遮蔽 `from src.engine import conv`
from src.engine import functional as F
from src.engine.layers import LayerParams, batchnorm, dropout, linear
from src.engine.recurrent import GATES, RecurrentOutput, recurrent_cell
from src.engine.tensor import Tensor, get_default_dtype
from src.utils.rng import named_rng

Shape = tuple[int, ...]


def kaiming_uniform(rng: np.random.Generator, shape: Sequence[int], fan_in: int) -> Tensor:
    """Kaiming-uniform (fan-in) 初始化, bound = sqrt(6 / fan_in)"""
    bound = math.sqrt(6.0 / fan_in)
    return Tensor(rng.uniform(-bound, bound, size=tuple(shape)), requires_grad=True)


def zeros(shape: Sequence[int], requires_grad: bool = True) -> Tensor:
    return Tensor(np.zeros(tuple(shape)), requires_grad=requires_grad)


def ones(shape: Sequence[int], requires_grad: bool = True) -> Tensor:
    return Tensor(np.ones(tuple(shape)), requires_grad=requires_grad)


class Module:
    """模块基类"""

    def __init__(self, name: str = '') -> None:
        object.__setattr__(self, '_children', {})
        object.__setattr__(self, '_layer_params', {})
        object.__setattr__(self, '_buffers', {})
        self.name = name
        self.training = True

    def __setattr__(self, key: str, value: Any) -> None:
        if isinstance(value, Module):
            self._children[key] = value
        elif isinstance(value, LayerParams):
            self._layer_params[key] = value
        object.__setattr__(self, key, value)

    def __call__(self, *args: Any, **kwargs: Any) -> Any:
        return self.forward(*args, **kwargs)

    def forward(self, *args: Any, **kwargs: Any) -> Any:
        raise NotImplementedError

    def output_shape(self, in_shape: Shape) -> Shape:
        """单样本输入形状 -> 单样本输出形状"""
        raise NotImplementedError

    def register_buffer(self, key: str, value: np.ndarray) -> None:
        """登记非训练状态 (会进入 state_dict)"""
        self._buffers[key] = value
        object.__setattr__(self, key, value)

    def set_buffer(self, key: str, value: np.ndarray) -> None:
        if key not in self._buffers:
            raise errors.ContractError(msg='未登记的 buffer', data=key)
        self.register_buffer(key, np.asarray(value, dtype=self._buffers[key].dtype))

    def children(self) -> Iterator[tuple[str, 'Module']]:
        yield from self._children.items()

    def modules(self) -> Iterator['Module']:
        yield self
        for _, child in self.children():
            yield from child.modules()

    def named_layer_params(self, prefix: str = '') -> Iterator[tuple[str, LayerParams]]:
        for key, params in self._layer_params.items():
            yield f'{prefix}{key}', params
        for key, child in self.children():
            yield from child.named_layer_params(f'{prefix}{key}.')

    def named_parameters(self) -> Iterator[tuple[str, Tensor]]:
        for path, params in self.named_layer_params():
            for field, tensor in params.tensors():
                yield f'{path}.{field}', tensor

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def named_buffers(self, prefix: str = '') -> Iterator[tuple[str, np.ndarray]]:
        for key, value in self._buffers.items():
            yield f'{prefix}{key}', value
        for key, params in self._layer_params.items():
            for field, value in params.buffers():
                yield f'{prefix}{key}.{field}', value
        for key, child in self.children():
            yield from child.named_buffers(f'{prefix}{key}.')

    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.parameters()))

    def train(self, mode: bool = True) -> 'Module':
        for module in self.modules():
            module.training = mode
            for params in module._layer_params.values():
                params.mode = Mode.TRAIN if mode else Mode.EVAL
        return self

    def eval(self) -> 'Module':
        return self.train(False)

    @property
    def mode(self) -> Mode:
        return Mode.TRAIN if self.training else Mode.EVAL

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def reseed(self, seed: int) -> None:
        """重置所有 dropout 的随机流"""
        for module in self.modules():
            if isinstance(module, Dropout):
                module.reset_rng(seed)

    def state_dict(self) -> dict[str, np.ndarray]:
        state = {name: p.data.copy() for name, p in self.named_parameters()}
        state.update({name: np.array(b, copy=True) for name, b in self.named_buffers()})
        return state

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        """按名称载入参数与 buffer, 名称或形状不一致时报错"""
        params = dict(self.named_parameters())
        buffers = dict(self.named_buffers())
        expected = set(params) | set(buffers)
        if set(state) != expected:
            missing, unexpected = sorted(expected - set(state)), sorted(set(state) - expected)
            raise errors.ShapeError(msg='state_dict 名称不一致', data={'missing': missing, 'unexpected': unexpected})
        for name, value in state.items():
            target = params[name].data if name in params else buffers[name]
            if tuple(np.shape(value)) != target.shape:
                raise errors.ShapeError(msg='state_dict 形状不一致', data=f'{name}: {np.shape(value)} vs {target.shape}')
        for name, value in state.items():
            if name in params:
                params[name].data = np.array(value, dtype=params[name].dtype)
            else:
                np.copyto(buffers[name], value)


class Sequential(Module):
    """顺序容器, 子层以层名登记 (重名或无名时用序号)"""

    def __init__(self, layers: Iterable[Module], name: str = '') -> None:
        super().__init__(name)
        self.layers: list[Module] = []
        for index, layer in enumerate(layers):
            key = layer.name if layer.name and layer.name not in vars(self) else str(index)
            setattr(self, key, layer)
            self.layers.append(layer)

    def forward(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = layer(x)
        return x

    def output_shape(self, in_shape: Shape) -> Shape:
        for layer in self.layers:
            in_shape = layer.output_shape(in_shape)
        return in_shape

    def __len__(self) -> int:
        return len(self.layers)


class Conv(Module):
    """N 维卷积层"""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel: int | Sequence[int],
        dims: int = 2,
        pad: int | Sequence[int] = 0,
        stride: int | Sequence[int] = 1,
        seed: int = 0,
        name: str = 'conv',
    ) -> None:
        super().__init__(name)
        self.dims = dims
        self.kernel = C.as_tuple(kernel, dims)
        self.pad = C.as_tuple(pad, dims)
        self.stride = C.as_tuple(stride, dims)
        self.in_channels, self.out_channels = in_channels, out_channels
        fan_in = in_channels * int(np.prod(self.kernel))
        rng = named_rng(seed, name)
        self.params = LayerParams(
            weight=kaiming_uniform(rng, (out_channels, in_channels) + self.kernel, fan_in),
            bias=zeros((out_channels,)),
        )

    def forward(self, x: Tensor) -> Tensor:
        return C.conv(x, self.params.weight, self.params.bias, self.dims, self.pad, self.stride)

    def output_shape(self, in_shape: Shape) -> Shape:
        if len(in_shape) != self.dims + 1 or in_shape[0] != self.in_channels:
            raise errors.ShapeError(msg=f'{self.name}: 输入形状不匹配', data=f'{in_shape}, 需要通道 {self.in_channels}')
        extents = tuple(
            C.conv_extent(n, k, p, s) for n, k, p, s in zip(in_shape[1:], self.kernel, self.pad, self.stride)
        )
        if min(extents) < 1:
            raise errors.ConfigError(msg=f'{self.name}: 空间尺寸塌缩', data=f'input={in_shape}, output={extents}')
        return (self.out_channels,) + extents


class ConvTranspose(Module):
    """N 维转置卷积层"""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel: int | Sequence[int],
        dims: int = 2,
        pad: int | Sequence[int] = 0,
        stride: int | Sequence[int] = 1,
        seed: int = 0,
        name: str = 'deconv',
    ) -> None:
        super().__init__(name)
        self.dims = dims
        self.kernel = C.as_tuple(kernel, dims)
        self.pad = C.as_tuple(pad, dims)
        self.stride = C.as_tuple(stride, dims)
        self.in_channels, self.out_channels = in_channels, out_channels
        fan_in = in_channels * int(np.prod(self.kernel))
        rng = named_rng(seed, name)
        self.params = LayerParams(
            weight=kaiming_uniform(rng, (in_channels, out_channels) + self.kernel, fan_in),
            bias=zeros((out_channels,)),
        )

    def forward(self, x: Tensor) -> Tensor:
        return C.conv_transpose(x, self.params.weight, self.params.bias, self.dims, self.pad, self.stride)

    def output_shape(self, in_shape: Shape) -> Shape:
        if len(in_shape) != self.dims + 1 or in_shape[0] != self.in_channels:
            raise errors.ShapeError(msg=f'{self.name}: 输入形状不匹配', data=f'{in_shape}')
        extents = tuple(
            C.conv_transpose_extent(n, k, p, s) for n, k, p, s in zip(in_shape[1:], self.kernel, self.pad, self.stride)
        )
        if min(extents) < 1:
            raise errors.ConfigError(msg=f'{self.name}: 空间尺寸非正', data=f'output={extents}')
        return (self.out_channels,) + extents


class Linear(Module):
    """全连接层, 作用于最后一维"""

    def __init__(self, in_features: int, out_features: int, seed: int = 0, name: str = 'linear') -> None:
        super().__init__(name)
        self.in_features, self.out_features = in_features, out_features
        rng = named_rng(seed, name)
        self.params = LayerParams(
            weight=kaiming_uniform(rng, (in_features, out_features), in_features),
            bias=zeros((out_features,)),
        )

    def forward(self, x: Tensor) -> Tensor:
        return linear(x, self.params)

    def output_shape(self, in_shape: Shape) -> Shape:
        if not in_shape or in_shape[-1] != self.in_features:
            raise errors.ShapeError(msg=f'{self.name}: 输入维度不匹配', data=f'{in_shape}, 需要 {self.in_features}')
        return in_shape[:-1] + (self.out_features,)


class BatchNorm(Module):
    """按通道 batchnorm, scale=1 shift=0 初始化"""

    def __init__(self, channels: int, name: str = 'bn') -> None:
        super().__init__(name)
        self.channels = channels
        dtype = get_default_dtype()
        self.params = LayerParams(
            scale=ones((channels,)),
            shift=zeros((channels,)),
            running_mean=np.zeros(channels, dtype=dtype),
            running_var=np.ones(channels, dtype=dtype),
        )

    def forward(self, x: Tensor) -> Tensor:
        return batchnorm(x, self.params)

    def output_shape(self, in_shape: Shape) -> Shape:
        if not in_shape or in_shape[0] != self.channels:
            raise errors.ShapeError(msg=f'{self.name}: 通道数不匹配', data=f'{in_shape}, 需要 {self.channels}')
        return in_shape


class ReLU(Module):
    def __init__(self, name: str = 'relu') -> None:
        super().__init__(name)

    def forward(self, x: Tensor) -> Tensor:
        return F.relu(x)

    def output_shape(self, in_shape: Shape) -> Shape:
        return in_shape


class Dropout(Module):
    """inverted dropout, 每层独立随机流"""

    def __init__(self, p: float, seed: int = 0, name: str = 'dropout') -> None:
        super().__init__(name)
        if not 0.0 <= p < 1.0:
            raise errors.ConfigError(msg=f'{name}: dropout 概率必须在 [0, 1) 内', data=f'p={p}')
        self.p = p
        self.reset_rng(seed)

    def reset_rng(self, seed: int) -> None:
        self.rng = named_rng(seed, f'{self.name}:mask')

    def forward(self, x: Tensor) -> Tensor:
        return dropout(x, self.p, self.mode, self.rng)

    def output_shape(self, in_shape: Shape) -> Shape:
        return in_shape


class MaxPool(Module):
    def __init__(
        self,
        size: int | Sequence[int],
        dims: int = 2,
        pad: int | Sequence[int] = 0,
        stride: int | Sequence[int] | None = None,
        name: str = 'pool',
    ) -> None:
        super().__init__(name)
        self.dims = dims
        self.size = C.as_tuple(size, dims)
        self.pad = C.as_tuple(pad, dims)
        self.stride = C.as_tuple(stride if stride is not None else size, dims)

    def forward(self, x: Tensor) -> Tensor:
        return C.maxpool(x, self.dims, self.size, self.pad, self.stride)

    def output_shape(self, in_shape: Shape) -> Shape:
        if len(in_shape) != self.dims + 1:
            raise errors.ShapeError(msg=f'{self.name}: 输入秩不匹配', data=f'{in_shape}')
        if any(k > n + 2 * p or p >= k for k, n, p in zip(self.size, in_shape[1:], self.pad)):
            raise errors.ConfigError(msg=f'{self.name}: 池化窗口大于填充后的输入', data=f'input={in_shape}, size={self.size}')
        extents = tuple(C.conv_extent(n, k, p, s) for n, k, p, s in zip(in_shape[1:], self.size, self.pad, self.stride))
        return (in_shape[0],) + extents


class GlobalAvgPool(Module):
    def __init__(self, name: str = 'gap') -> None:
        super().__init__(name)

    def forward(self, x: Tensor) -> Tensor:
        return C.global_avg_pool(x)

    def output_shape(self, in_shape: Shape) -> Shape:
        return (in_shape[0],)


class Flatten(Module):
    def __init__(self, name: str = 'flatten') -> None:
        super().__init__(name)

    def forward(self, x: Tensor) -> Tensor:
        return F.flatten(x)

    def output_shape(self, in_shape: Shape) -> Shape:
        return (int(np.prod(in_shape)),)


class GradReverse(Module):
    def __init__(self, lam: float = 1.0, name: str = 'grad_reverse') -> None:
        super().__init__(name)
        self.lam = lam

    def forward(self, x: Tensor) -> Tensor:
        return F.grad_reverse(x, self.lam)

    def output_shape(self, in_shape: Shape) -> Shape:
        return in_shape


class Recurrent(Module):
    """
    多层循环网络

    权重按 PyTorch 习惯初始化为 U(−1/√H, 1/√H)。
    """

    def __init__(
        self,
        kind: RecurrentKind,
        input_size: int,
        hidden_size: int,
        num_layers: int = 2,
        seed: int = 0,
        name: str = 'rnn',
    ) -> None:
        super().__init__(name)
        self.kind = RecurrentKind(kind)
        self.input_size, self.hidden_size, self.num_layers = input_size, hidden_size, num_layers
        bound = 1.0 / math.sqrt(hidden_size)
        width = GATES[self.kind] * hidden_size
        for index in range(num_layers):
            rng = named_rng(seed, f'{name}.{index}')
            features = input_size if index == 0 else hidden_size

            def uniform(shape: tuple[int, ...]) -> Tensor:
                return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)

            setattr(
                self,
                f'layer{index}',
                LayerParams(
                    weight=uniform((features, width)),
                    weight_hh=uniform((hidden_size, width)),
                    bias=uniform((width,)),
                    bias_hh=uniform((width,)),
                ),
            )

    def forward(self, x: Tensor) -> RecurrentOutput:
        output = None
        for index in range(self.num_layers):
            output = recurrent_cell(self.kind, x, getattr(self, f'layer{index}'))
            x = output.sequence
        return output  # type: ignore[return-value]

    def output_shape(self, in_shape: Shape) -> Shape:
        if len(in_shape) != 2 or in_shape[1] != self.input_size:
            raise errors.ShapeError(msg=f'{self.name}: 输入应为 (time, {self.input_size})', data=f'{in_shape}')
        return (self.hidden_size,)
