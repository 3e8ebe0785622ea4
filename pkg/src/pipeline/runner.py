#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : runner.py
# @Software: Cursor
# @Description: 按顺序执行阶段, 跳过配置未变的已完成阶段
import dataclasses
import os

from typing import Sequence

from src.common.enums import Stage
from src.common.logger import log, run_context
from src.core.conf import settings
from src.pipeline.config import PipelineConfig
from src.pipeline.markers import StageMarkers, output_lock
from src.pipeline.stages import STAGES, PipelineContext
from src.utils.file_ops import atomic_write_text
from src.utils.key_value import format_key_values

RESOLVED_CONFIG = 'config.resolved'


@dataclasses.dataclass
class PipelineResult:
    ran: list[Stage] = dataclasses.field(default_factory=list)
    skipped: list[Stage] = dataclasses.field(default_factory=list)


def run_pipeline(config: PipelineConfig, stages: Sequence[Stage] | None = None, force: bool = False) -> PipelineResult:
    """
    执行阶段 (默认全部, 按固定顺序)

    已完成且配置摘要一致的阶段跳过; 失败的阶段写 .failed 标记后继续抛出异常, 已有产物保留。
    """
    order = list(Stage)
    requested = sorted(set(stages or order), key=order.index)
    ctx = PipelineContext(config)
    markers = StageMarkers(config.paths.out)
    result = PipelineResult()
    rid = config.stage_hash(Stage.REPORT)[: settings.LOG_RUN_ID_LENGTH]
    with run_context(rid), output_lock(config.paths.out):
        atomic_write_text(os.path.join(config.paths.out, RESOLVED_CONFIG), format_key_values(config.flat()))
        log.info(f'系统 {config.system_name}, 阶段 {[s.value for s in requested]}')
        for stage in requested:
            config_hash = config.stage_hash(stage)
            if not force and markers.is_done(stage, config_hash):
                log.info(f'阶段 {stage.value} 已完成, 跳过')
                result.skipped.append(stage)
                continue
            log.info(f'阶段 {stage.value} 开始')
            try:
                STAGES[stage](ctx)
            except BaseException as e:
                markers.mark_failed(stage, config_hash, e)
                log.error(f'阶段 {stage.value} 失败: {e}')
                raise
            markers.mark_done(stage, config_hash)
            result.ran.append(stage)
    return result
