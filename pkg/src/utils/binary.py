#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : binary.py
# @Software: Cursor
# @Description: 小端二进制读写 (checkpoint / 特征缓存共用)
import struct

import numpy as np

from src.core.exceptions import errors

U32 = struct.Struct('<I')
F32 = np.dtype('<f4')


def pack_u32(value: int) -> bytes:
    return U32.pack(value)


def pack_text(text: str | bytes) -> bytes:
    """u32 字节长度 + UTF-8 文本"""
    payload = text.encode('utf-8') if isinstance(text, str) else text
    return U32.pack(len(payload)) + payload


def pack_array(array: np.ndarray) -> bytes:
    """u32 维数 + 各维 u32 + 小端 f32 数据"""
    array = np.asarray(array)
    header = U32.pack(array.ndim) + b''.join(U32.pack(d) for d in array.shape)
    return header + np.ascontiguousarray(array, dtype=F32).tobytes()


class BinaryReader:
    """顺序读取, 越界即视为文件损坏"""

    def __init__(self, payload: bytes, source: str = '') -> None:
        self.payload = payload
        self.offset = 0
        self.source = source

    @property
    def remaining(self) -> int:
        return len(self.payload) - self.offset

    def read(self, size: int) -> bytes:
        if size < 0 or size > self.remaining:
            raise errors.CorruptionError(
                msg='文件被截断', data=f'{self.source}: offset={self.offset}, need={size}, left={self.remaining}'
            )
        chunk = self.payload[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def expect(self, magic: bytes) -> None:
        if self.read(len(magic)) != magic:
            raise errors.CorruptionError(msg='文件头不匹配', data=f'{self.source}: 需要 {magic!r}')

    def u32(self) -> int:
        return U32.unpack(self.read(U32.size))[0]

    def text(self) -> str:
        raw = self.read(self.u32())
        try:
            return raw.decode('utf-8')
        except UnicodeDecodeError as e:
            raise errors.CorruptionError(msg='文本段不是合法 UTF-8', data=self.source) from e

    def array(self) -> np.ndarray:
        shape = tuple(self.u32() for _ in range(self.u32()))
        count = int(np.prod(shape, dtype=np.int64))
        return np.frombuffer(self.read(count * F32.itemsize), dtype=F32).reshape(shape).copy()
