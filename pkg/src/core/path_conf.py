#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import os

from pathlib import Path

# 获取 src 目录
BasePath = Path(__file__).resolve().parent.parent

# 项目根目录
ProjectPath = BasePath.parent

# 日志文件路径
LOG_DIR = os.path.join(ProjectPath, 'log')

# 默认输出根目录 (特征缓存, 模型, 预测, 账本)
OUTPUT_DIR = os.path.join(ProjectPath, 'output')
