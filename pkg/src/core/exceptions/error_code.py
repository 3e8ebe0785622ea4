#!/usr/bin/env python3
# -*- coding: utf-8 -*-
from enum import Enum


class CustomCodeBase(Enum):
    """自定义状态码基类"""

    @property
    def code(self) -> int:
        """
        获取状态码
        """
        return self.value[0]

    @property
    def msg(self) -> str:
        """
        获取状态码信息
        """
        return self.value[1]


class ExitCode(CustomCodeBase):
    """进程退出码"""

    SUCCESS = (0, '执行成功')
    FAILURE = (1, '执行失败')
    CONFIG = (2, '配置错误')
    INGESTION = (3, '数据读取错误')
    TRAINING = (4, '训练失败')
