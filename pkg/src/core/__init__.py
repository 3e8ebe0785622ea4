#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : __init__.py
# @Software: Cursor
# @Description: 全局配置、路径与异常
