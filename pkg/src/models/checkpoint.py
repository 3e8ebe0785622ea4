#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : checkpoint.py
# @Software: Cursor
# @Description: 网络 checkpoint 读写
"""
checkpoint 格式 (小端)::

    b'SCNC1'
    u32 长度 + NetworkSpec JSON
    u32 条目数
    每个条目: u32 长度 + 名称, u32 维数, 各维 u32, f32 数据

条目包括全部参数与 buffer (batchnorm 滑动统计量、输入标准化)。
"""
import os

from pathlib import Path

from src.common.logger import log
from src.core.exceptions import errors
from src.models.network import Network
from src.models.registry import build_from_spec
from src.models.spec import NetworkSpec
from src.utils.binary import BinaryReader, pack_array, pack_text, pack_u32
from src.utils.file_ops import atomic_write_bytes

MAGIC = b'SCNC1'


def save_checkpoint(net: Network, path: str | os.PathLike) -> None:
    state = net.state_dict()
    chunks = [MAGIC, pack_text(net.spec.to_json()), pack_u32(len(state))]
    for name, value in state.items():
        chunks.append(pack_text(name))
        chunks.append(pack_array(value))
    atomic_write_bytes(path, b''.join(chunks))
    log.debug(f'checkpoint 已写入 {path}: {len(state)} 个条目, {net.num_parameters()} 个参数')


def load_checkpoint(path: str | os.PathLike) -> Network:
    """按描述重建网络并载入参数; 描述与重建结果不一致时视为损坏"""
    path = Path(path)
    if not path.is_file():
        raise errors.IngestionError(msg='checkpoint 不存在', data=str(path))
    reader = BinaryReader(path.read_bytes(), source=str(path))
    reader.expect(MAGIC)
    spec = NetworkSpec.from_json(reader.text().encode('utf-8'))
    stored_layers = list(spec.layers)
    net = build_from_spec(spec.replace(layers=[]))
    if net.spec.layers != stored_layers:
        raise errors.CorruptionError(msg='checkpoint 的层描述与重建网络不一致', data=str(path))
    state = {}
    for _ in range(reader.u32()):
        name = reader.text()
        state[name] = reader.array()
    if reader.remaining:
        raise errors.CorruptionError(msg='checkpoint 尾部有多余数据', data=f'{path}: {reader.remaining} 字节')
    net.load_state_dict(state)
    return net
