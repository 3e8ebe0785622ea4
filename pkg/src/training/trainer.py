#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : trainer.py
# @Software: Cursor
# @Description: 分类器训练与评估
import csv
import dataclasses
import os

from typing import Sequence

import msgspec
import numpy as np

from src.common.dataclasses import PredictionRecord
from src.common.logger import log
from src.core.exceptions import errors
from src.engine.tensor import Tape, Tensor, backward
from src.models.network import Network
from src.training.config import TrainConfig
from src.training.data import LabeledFeatures, iterate_batches, network_inputs
from src.training.metrics import accuracy, confusion_matrix
from src.training.optim import Adam, AdamState, EarlyStopping
from src.utils.file_ops import atomic_open
from src.utils.rng import named_rng

HISTORY_COLUMNS = ('epoch', 'train_loss', 'val_loss', 'lr')


class HistoryRow(msgspec.Struct, array_like=True):
    epoch: int
    train_loss: float
    val_loss: float
    lr: float


@dataclasses.dataclass
class TrainState:
    """一个 epoch 结束时的训练状态"""
    epoch: int
    best_val_loss: float
    since_improvement: int
    lr: float
    adam: AdamState
    rng_state: dict


@dataclasses.dataclass
class TrainResult:
    history: list[HistoryRow]
    best_epoch: int
    best_val_loss: float
    stopped_early: bool
    state: TrainState


@dataclasses.dataclass
class EvaluationResult:
    accuracy: float
    confusion: np.ndarray
    records: list[PredictionRecord]


def clip_loss(net: Network, data: LabeledFeatures) -> float:
    """片段级交叉熵 (逐帧网络先做几何平均汇总)"""
    probs = net.predict_clips(data.features)
    picked = probs[np.arange(len(data)), data.labels]
    return float(-np.mean(np.log(np.clip(picked, np.finfo(np.float64).tiny, None))))


def train_model(
    net: Network,
    train_set: LabeledFeatures,
    val_set: LabeledFeatures,
    config: TrainConfig,
    seed: int = 0,
) -> TrainResult:
    """
    Adam 训练, 验证损失连续 patience 个 epoch 未下降时停止

    学习率在连续 lr_decay_patience 个 epoch 未下降时减半; 结束时恢复验证损失最低的参数。
    输入标准化参数在训练集上拟合。
    """
    if not len(train_set) or not len(val_set):
        raise errors.InputError(msg='训练集与验证集都不能为空', data=f'train={len(train_set)}, val={len(val_set)}')
    overlap = set(train_set.clip_ids) & set(val_set.clip_ids)
    if overlap:
        raise errors.InputError(msg='训练集与验证集有重叠片段', data=sorted(overlap)[:10])

    net.fit_standardization(train_set.features)
    net.reseed(seed)
    rng = named_rng(seed, 'train:batches')
    x, labels, cities = network_inputs(net, train_set)
    optimizer = Adam(net.named_parameters(), lr=config.lr, beta1=config.beta1, beta2=config.beta2, eps=config.eps)
    stopper = EarlyStopping(config.patience, config.lr_decay_patience, config.lr_decay_factor, config.lr_floor)
    history: list[HistoryRow] = []
    best_state = net.state_dict()

    for epoch in range(1, config.max_epochs + 1):
        net.train()
        lr = optimizer.lr
        total, count = 0.0, 0
        for index in iterate_batches(len(x), config.batch_size, rng):
            optimizer.zero_grad()
            with Tape():
                loss = net.loss(Tensor(x[index]), labels[index], None if cities is None else cities[index])
            backward(loss)
            optimizer.step()
            total += loss.item() * len(index)
            count += len(index)
        train_loss = total / count
        val_loss = clip_loss(net, val_set)
        if not np.isfinite(train_loss) or not np.isfinite(val_loss):
            raise errors.TrainingError(msg='损失出现非有限值', data=f'epoch={epoch}, train={train_loss}, val={val_loss}')
        history.append(HistoryRow(epoch=epoch, train_loss=train_loss, val_loss=val_loss, lr=lr))
        if stopper(val_loss, epoch, optimizer):
            best_state = net.state_dict()
        log.info(
            f'{net.spec.variant} epoch {epoch}/{config.max_epochs}: '
            f'train_loss={train_loss:.4f}, val_loss={val_loss:.4f}, lr={lr:.2e}, stagnant={stopper.counter}'
        )
        if stopper.early_stop:
            log.info(f'验证损失连续 {stopper.counter} 个 epoch 未下降, 在 epoch {epoch} 停止')
            break

    net.load_state_dict(best_state)
    state = TrainState(
        epoch=history[-1].epoch,
        best_val_loss=stopper.best_loss,
        since_improvement=stopper.counter,
        lr=optimizer.lr,
        adam=optimizer.state,
        rng_state=rng.bit_generator.state,
    )
    return TrainResult(
        history=history,
        best_epoch=stopper.best_epoch,
        best_val_loss=stopper.best_loss,
        stopped_early=stopper.early_stop,
        state=state,
    )


def evaluate(
    net: Network,
    dataset: LabeledFeatures,
    classifier_id: str = '',
    seed_id: int | None = None,
) -> EvaluationResult:
    """片段级准确率、混淆矩阵与逐片段预测"""
    probs = net.predict_clips(dataset.features)
    records = [
        PredictionRecord(clip_id=clip_id, probs=p, classifier_id=classifier_id, seed_id=seed_id)
        for clip_id, p in zip(dataset.clip_ids, probs)
    ]
    confusion = confusion_matrix(dataset.labels, [r.label for r in records], net.spec.n_classes)
    return EvaluationResult(accuracy=accuracy(confusion), confusion=confusion, records=records)


def write_history(rows: Sequence[HistoryRow], path: str | os.PathLike) -> None:
    with atomic_open(path, 'w', encoding='utf-8') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(HISTORY_COLUMNS)
        for row in rows:
            writer.writerow([row.epoch, repr(row.train_loss), repr(row.val_loss), repr(row.lr)])


def read_history(path: str | os.PathLike) -> list[HistoryRow]:
    try:
        with open(path, encoding='utf-8', newline='') as fh:
            rows = list(csv.DictReader(fh))
    except OSError as e:
        raise errors.IngestionError(msg='无法读取训练历史', data=str(path)) from e
    return [
        HistoryRow(epoch=int(r['epoch']), train_loss=float(r['train_loss']), val_loss=float(r['val_loss']),
                   lr=float(r['lr']))
        for r in rows
    ]
