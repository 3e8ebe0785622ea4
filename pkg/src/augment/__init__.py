#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : __init__.py
# @Software: Cursor
# @Description: 迭代式数据增强
from src.augment.database import AugmentedDatabase, FakeSet
from src.augment.ledger import RoundRecord, append_record, read_ledger
from src.augment.protocol import (
    AugmentationRound,
    AugmentConfig,
    apply_decision,
    gan_candidates,
    run_round,
    run_rounds,
)
from src.augment.split import city_split, partition_cities

__all__ = [
    'AugmentConfig',
    'AugmentationRound',
    'AugmentedDatabase',
    'FakeSet',
    'RoundRecord',
    'append_record',
    'apply_decision',
    'city_split',
    'gan_candidates',
    'partition_cities',
    'read_ledger',
    'run_round',
    'run_rounds',
]
