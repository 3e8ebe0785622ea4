#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : report.py
# @Software: Cursor
# @Description: 各系统准确率汇总表
import glob
import os

from typing import Mapping

import msgspec

from src.ensemble.io import read_predictions
from src.training.metrics import record_accuracy

FUSION_SUFFIX = '.conf'


class ReportRow(msgspec.Struct):
    name: str
    kind: str
    accuracy: float | None
    clips: int


def build_report(
    predictions_dir: str | os.PathLike,
    labels: Mapping[str, int] | None = None,
    fusion_dir: str | os.PathLike | None = None,
) -> list[ReportRow]:
    """
    predictions_dir 下每个 <系统名>.csv 一行; fusion_dir 下有同名 .conf 的记为融合系统

    :param labels: 片段 id -> 场景下标, 缺失时准确率为 None
    """
    fused = set()
    if fusion_dir is not None:
        fused = {os.path.basename(p)[: -len(FUSION_SUFFIX)]
                 for p in glob.glob(os.path.join(os.fspath(fusion_dir), f'*{FUSION_SUFFIX}'))}
    rows = []
    for path in sorted(glob.glob(os.path.join(os.fspath(predictions_dir), '*.csv'))):
        records = read_predictions(path)
        name = records[0].classifier_id if records else os.path.splitext(os.path.basename(path))[0]
        rows.append(ReportRow(
            name=name,
            kind='fusion' if name in fused else 'system',
            accuracy=record_accuracy(records, dict(labels)) if labels else None,
            clips=len(records),
        ))
    # 单系统在前, 融合系统在后
    return sorted(rows, key=lambda r: (r.kind == 'fusion', r.name))


def format_report(rows: list[ReportRow]) -> str:
    width = max([len('system'), *(len(r.name) for r in rows)])
    lines = [f'{"system":<{width}}  {"type":<6}  {"accuracy":>8}  {"clips":>5}']
    lines.append('-' * len(lines[0]))
    for row in rows:
        accuracy = 'n/a' if row.accuracy is None else f'{100 * row.accuracy:.2f}%'
        lines.append(f'{row.name:<{width}}  {row.kind:<6}  {accuracy:>8}  {row.clips:>5}')
    return '\n'.join(lines) + '\n'


def report(
    predictions_dir: str | os.PathLike,
    labels: Mapping[str, int] | None = None,
    fusion_dir: str | os.PathLike | None = None,
) -> str:
    return format_report(build_report(predictions_dir, labels, fusion_dir))
