#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : __init__.py
# @Software: Cursor
# @Description: 日志、枚举与跨模块数据类
