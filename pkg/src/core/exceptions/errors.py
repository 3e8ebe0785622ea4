#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
全局业务异常类

库代码只负责 raise xxxError, 由 src/main.py 统一把异常的 code 转换为进程退出码
"""

from typing import Any

from .error_code import ExitCode

ErrorData = str | dict[str, Any] | list[str] | None


class BaseError(Exception):
    """
    基础异常类
    """
    code: int = ExitCode.FAILURE.code

    def __init__(self, *, msg: str | None = None, data: ErrorData = None):
        self.msg = msg
        self.data = data
        super().__init__(msg)

    def __str__(self) -> str:
        if self.data:
            return f'{self.msg}: {self.data}'
        return str(self.msg)


class ConfigError(BaseError):
    """
    配置错误异常类
    """
    code = ExitCode.CONFIG.code

    def __init__(self, *, msg: str = 'Configuration Error', data: ErrorData = None):
        super().__init__(msg=msg, data=data)


class ShapeError(BaseError):
    """
    维度不匹配异常类
    """

    def __init__(self, *, msg: str = 'Dimension Error', data: ErrorData = None):
        super().__init__(msg=msg, data=data)


class DegenerateBatchError(ShapeError):
    """
    训练模式下 batch 过小
    """

    def __init__(self, *, msg: str = 'Degenerate Batch', data: ErrorData = None):
        super().__init__(msg=msg, data=data)


class ContractError(BaseError):
    """
    调用约定被破坏 (例如对非标量求导, 重复应用未完成的轮次)
    """

    def __init__(self, *, msg: str = 'Contract Violation', data: ErrorData = None):
        super().__init__(msg=msg, data=data)


class InputError(BaseError):
    """
    输入数据错误异常类
    """
    code = ExitCode.INGESTION.code

    def __init__(self, *, msg: str = 'Invalid Input', data: ErrorData = None):
        super().__init__(msg=msg, data=data)


class IngestionError(InputError):
    """
    数据读取错误异常类
    """

    def __init__(self, *, msg: str = 'Ingestion Error', data: ErrorData = None):
        super().__init__(msg=msg, data=data)


class CorruptionError(IngestionError):
    """
    缓存文件损坏异常类
    """

    def __init__(self, *, msg: str = 'Corrupted File', data: ErrorData = None):
        super().__init__(msg=msg, data=data)


class AlignmentError(InputError):
    """
    预测集合的片段不对齐
    """

    def __init__(self, *, msg: str = 'Alignment Error', data: ErrorData = None):
        super().__init__(msg=msg, data=data)


class SplitError(InputError):
    """
    数据集无法按城市划分
    """

    def __init__(self, *, msg: str = 'Split Error', data: ErrorData = None):
        super().__init__(msg=msg, data=data)


class TrainingError(BaseError):
    """
    训练失败异常类
    """
    code = ExitCode.TRAINING.code

    def __init__(self, *, msg: str = 'Training Failure', data: ErrorData = None):
        super().__init__(msg=msg, data=data)


class GanDivergenceError(TrainingError):
    """
    GAN 损失出现非有限值
    """

    def __init__(self, *, msg: str = 'GAN Diverged', data: ErrorData = None):
        super().__init__(msg=msg, data=data)
