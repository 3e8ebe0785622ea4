#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : __init__.py
# @Software: Cursor
# @Description: 分类器训练
from src.training.config import TrainConfig
from src.training.data import LabeledFeatures, iterate_batches, network_inputs, validation_split
from src.training.metrics import accuracy, confusion_matrix, record_accuracy
from src.training.optim import Adam, AdamState, EarlyStopping, adam_step
from src.training.trainer import (
    EvaluationResult,
    HistoryRow,
    TrainResult,
    TrainState,
    clip_loss,
    evaluate,
    read_history,
    train_model,
    write_history,
)

__all__ = [
    'Adam',
    'AdamState',
    'EarlyStopping',
    'EvaluationResult',
    'HistoryRow',
    'LabeledFeatures',
    'TrainConfig',
    'TrainResult',
    'TrainState',
    'accuracy',
    'adam_step',
    'clip_loss',
    'confusion_matrix',
    'evaluate',
    'iterate_batches',
    'network_inputs',
    'read_history',
    'record_accuracy',
    'train_model',
    'validation_split',
    'write_history',
]
