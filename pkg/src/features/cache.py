#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : cache.py
# @Software: Cursor
# @Description: SCNF1 特征缓存文件
"""
特征缓存格式 (小端)

    b'SCNF1' | u32 L | u32 c | u32 n | L·c·n 个 f32 | u32 尾部字节数 | UTF-8 key=value 行

尾部先写特征图自身的字段 (以 @ 开头的保留键), 再按插入顺序写 metadata。
"""
import os

import numpy as np

from src.common.dataclasses import FeatureMap
from src.common.enums import ChannelMode, FeatureKind
from src.core.exceptions import errors
from src.utils.binary import F32, BinaryReader, pack_text, pack_u32
from src.utils.file_ops import atomic_write_bytes

MAGIC = b'SCNF1'
RESERVED = ('@hop_ms', '@win_ms', '@channel_mode', '@feature_kind')


def _trailer(feature: FeatureMap) -> str:
    lines = [
        f'@hop_ms={feature.hop_ms!r}',
        f'@win_ms={feature.win_ms!r}',
        f'@channel_mode={feature.channel_mode.value}',
        f'@feature_kind={feature.feature_kind.value}',
    ]
    for key, value in feature.metadata.items():
        key, value = str(key), str(value)
        if not key or key.startswith('@') or '=' in key or '\n' in key or '\n' in value:
            raise errors.InputError(msg='metadata 键值不能写入缓存尾部', data=f'{key!r}={value!r}')
        lines.append(f'{key}={value}')
    return '\n'.join(lines)


def encode_feature(feature: FeatureMap) -> bytes:
    header = MAGIC + b''.join(pack_u32(d) for d in feature.shape)
    payload = np.ascontiguousarray(feature.data, dtype=F32).tobytes()
    return header + payload + pack_text(_trailer(feature))


def decode_feature(payload: bytes, source: str = '') -> FeatureMap:
    reader = BinaryReader(payload, source)
    reader.expect(MAGIC)
    shape = (reader.u32(), reader.u32(), reader.u32())
    count = shape[0] * shape[1] * shape[2]
    data = np.frombuffer(reader.read(count * F32.itemsize), dtype=F32).reshape(shape).copy()
    trailer = reader.text()
    if reader.remaining:
        raise errors.CorruptionError(msg='缓存尾部之后还有多余字节', data=f'{source}: {reader.remaining} bytes')
    fields: dict[str, str] = {}
    metadata: dict[str, str] = {}
    for line in trailer.split('\n') if trailer else []:
        key, sep, value = line.partition('=')
        if not sep:
            raise errors.CorruptionError(msg='缓存尾部行格式错误', data=f'{source}: {line!r}')
        (fields if key in RESERVED else metadata)[key] = value
    missing = [key for key in RESERVED if key not in fields]
    if missing:
        raise errors.CorruptionError(msg='缓存尾部缺少字段', data=missing)
    try:
        return FeatureMap(
            data=data,
            hop_ms=float(fields['@hop_ms']),
            win_ms=float(fields['@win_ms']),
            channel_mode=ChannelMode(fields['@channel_mode']),
            feature_kind=FeatureKind(fields['@feature_kind']),
            metadata=metadata,
        )
    except ValueError as e:
        raise errors.CorruptionError(msg='缓存尾部字段无法解析', data=f'{source}: {e}') from e


def write_feature_cache(feature: FeatureMap, path: str | os.PathLike) -> None:
    """原子写入: 先写临时文件再 rename"""
    atomic_write_bytes(path, encode_feature(feature))


def read_feature_cache(path: str | os.PathLike) -> FeatureMap:
    try:
        with open(path, 'rb') as fh:
            payload = fh.read()
    except OSError as e:
        raise errors.IngestionError(msg='无法读取特征缓存', data=str(path)) from e
    return decode_feature(payload, os.fspath(path))
