#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : key_value.py
# @Software: Cursor
# @Description: key=value 文本配置的读写
"""
与 .env 相同的语法: 每行 key=value, # 开头为注释, 值可加引号

键可以带点号前缀表示分节, 例如 train.max_epochs=50。
"""
import io
import os

from typing import Mapping

from dotenv.parser import parse_stream

from src.core.exceptions import errors


def parse_key_values(text: str, source: str = '<text>') -> dict[str, str]:
    """
    解析 key=value 文本, 保持出现顺序

    :param source: 报错时使用的来源名
    """
    values: dict[str, str] = {}
    for binding in parse_stream(io.StringIO(text)):
        where = f'{source}:{binding.original.line}'
        if binding.error or (binding.key is not None and binding.value is None):
            raise errors.ConfigError(msg='无法解析的配置行', data=f'{where}: {binding.original.string.strip()}')
        if binding.key is None:
            continue
        if binding.key in values:
            raise errors.ConfigError(msg='配置项重复', data=f'{where}: {binding.key}')
        values[binding.key] = binding.value  # type: ignore[assignment]
    return values


def read_key_value_file(path: str | os.PathLike) -> dict[str, str]:
    try:
        with open(path, encoding='utf-8') as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as e:
        raise errors.ConfigError(msg='无法读取配置文件', data=str(path)) from e
    return parse_key_values(text, os.fspath(path))


def format_key_values(values: Mapping[str, object]) -> str:
    return ''.join(f'{key}={value}\n' for key, value in values.items())
