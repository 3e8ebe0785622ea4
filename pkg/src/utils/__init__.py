#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : __init__.py
# @Software: Cursor
# @Desc    : 工具函数: 二进制编解码, 原子写, 摘要, 随机流, key=value 配置
