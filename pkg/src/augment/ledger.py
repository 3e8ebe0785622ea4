#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : ledger.py
# @Software: Cursor
# @Description: 增强轮次账本 (逐行 JSON, 只追加)
import os

import msgspec

from src.common.enums import RoundDecision
from src.core.exceptions import errors


class RoundRecord(msgspec.Struct):
    index: int
    split_hash: str
    accuracy_a: float
    accuracy_b: float | None
    decision: RoundDecision
    candidate_path: str = ''
    diagnostic: str = ''


_encoder = msgspec.json.Encoder()
_decoder = msgspec.json.Decoder(RoundRecord)


def append_record(path: str | os.PathLike, record: RoundRecord) -> None:
    os.makedirs(os.path.dirname(os.fspath(path)) or '.', exist_ok=True)
    with open(path, 'ab') as fh:
        fh.write(_encoder.encode(record) + b'\n')
        fh.flush()
        os.fsync(fh.fileno())


def read_ledger(path: str | os.PathLike) -> list[RoundRecord]:
    if not os.path.exists(path):
        return []
    records = []
    with open(path, 'rb') as fh:
        for number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(_decoder.decode(line))
            except (msgspec.ValidationError, msgspec.DecodeError) as e:
                raise errors.CorruptionError(msg='账本行无法解析', data=f'{path}:{number}: {e}') from e
    return records
