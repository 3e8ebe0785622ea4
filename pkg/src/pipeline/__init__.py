#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : __init__.py
# @Software: Cursor
# @Description: 命令行流水线
from src.pipeline.config import PipelineConfig, build_pipeline_config, load_pipeline_config
from src.pipeline.markers import StageMarkers, output_lock
from src.pipeline.report import ReportRow, build_report, format_report, report
from src.pipeline.runner import PipelineResult, run_pipeline

__all__ = [
    'PipelineConfig',
    'PipelineResult',
    'ReportRow',
    'StageMarkers',
    'build_pipeline_config',
    'build_report',
    'format_report',
    'load_pipeline_config',
    'output_lock',
    'report',
    'run_pipeline',
]
