#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : main.py
# @Software: Cursor
# @Description: 命令行入口
"""
用法::

    python -m src.main mkdata --out output
    python -m src.main run --config configs/mini.conf --jobs 4
    python -m src.main train --config configs/mini.conf --set classifier.variant=dcnn
    python -m src.main report --out output
"""
import argparse
import os
import sys

from typing import Sequence

from dotenv import load_dotenv

from src.common.enums import Stage
from src.common.logger import log, set_customize_logfile, setup_logging
from src.core.conf import settings
from src.core.exceptions import errors
from src.core.exceptions.error_code import ExitCode
from src.pipeline import load_pipeline_config, run_pipeline
from src.pipeline.runner import RESOLVED_CONFIG

load_dotenv()

RUN_ALL = 'run'


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.PROJECT_NAME,
        description=settings.DESCRIPTION,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {settings.VERSION}')
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, default=None, help='key=value 配置文件')
    common.add_argument('--seed', type=int, default=None, help='全局随机种子')
    common.add_argument('--out', type=str, default=None, help='输出根目录')
    common.add_argument('--jobs', type=int, default=None, help='特征提取与多 seed 训练的并行进程数')
    common.add_argument('--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
                        help='覆盖配置项, 可重复')
    common.add_argument('--force', action='store_true', help='忽略完成标记, 重新执行')
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser(RUN_ALL, parents=[common], help='按顺序执行全部阶段')
    for stage in Stage:
        sub.add_parser(stage.value, parents=[common], help=f'只执行 {stage.value} 阶段')
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    setup_logging()
    overrides = list(args.overrides)
    for key, value in (('seed', args.seed), ('paths.out', args.out), ('jobs', args.jobs)):
        if value is not None:
            overrides.append(f'{key}={value}')
    try:
        config = load_pipeline_config(args.config, overrides)
        set_customize_logfile(os.path.join(config.paths.out, 'log'))
        stages = list(Stage) if args.command == RUN_ALL else [Stage(args.command)]
        result = run_pipeline(config, stages, force=args.force)
        if Stage.REPORT in stages:
            with open(os.path.join(config.paths.out, 'report.txt'), encoding='utf-8') as fh:
                sys.stdout.write(fh.read())
        log.success(f'完成: 执行 {[s.value for s in result.ran]}, 跳过 {[s.value for s in result.skipped]}')
    except errors.BaseError as e:
        log.error(f'{type(e).__name__}: {e}')
        return e.code
    except KeyboardInterrupt:
        log.warning('被中断')
        return ExitCode.FAILURE.code
    except Exception as e:
        log.exception(f'未预期的错误: {e}')
        return ExitCode.FAILURE.code
    log.debug(f'配置见 {os.path.join(config.paths.out, RESOLVED_CONFIG)}')
    return ExitCode.SUCCESS.code


if __name__ == '__main__':
    sys.exit(main())
