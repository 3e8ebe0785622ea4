#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : protocol.py
# @Software: Cursor
# @Description: 生成样本的逐轮筛选
"""
一轮增强

    按城市划分 sub-train / sub-test
    -> 分类器 A 在 sub-train 上训练, 在 sub-test 上测试
    -> GAN 在 sub-train 真实片段上训练, 从多个 epoch 的生成器快照采样候选
    -> 分类器 B (与 A 同结构、同超参、同 seed) 在 sub-train ∪ 候选上训练
    -> B 的 sub-test 准确率严格高于 A 时接受候选

sub-train 包含此前所有被接受的生成样本; A 和 B 的验证集都取自 sub-train 的真实片段。
"""
import dataclasses
import os

from typing import Callable, Sequence

import numpy as np

from pydantic import BaseModel, Field

from src.augment.database import AugmentedDatabase, FakeSet
from src.augment.ledger import RoundRecord, append_record
from src.augment.split import city_split
from src.common.dataclasses import FeatureMap
from src.common.enums import RoundDecision, RoundStatus
from src.common.logger import log
from src.core.conf import settings
from src.core.exceptions import errors
from src.features.cache import write_feature_cache
from src.gan.config import GanConfig
from src.gan.networks import GanTriple
from src.gan.sampling import sample_fakes
from src.gan.trainer import train_gan
from src.models.network import Network
from src.training.config import TrainConfig
from src.training.data import LabeledFeatures, validation_split
from src.training.trainer import evaluate, train_model
from src.utils.hashing import Sha256Digest
from src.utils.rng import child_seed, named_rng

ClassifierFactory = Callable[[int], Network]
CandidateFn = Callable[[LabeledFeatures, int, Sequence[str], np.random.Generator], list[FeatureMap]]


class AugmentConfig(BaseModel):
    rounds: int = Field(default=1, ge=0)
    candidate_fraction: float = Field(default=settings.GAN_CANDIDATE_FRACTION, gt=0.0)


@dataclasses.dataclass
class AugmentationRound:
    index: int
    sub_train: list[str]
    sub_test: list[str]
    accuracy_a: float | None = None
    accuracy_b: float | None = None
    decision: RoundDecision | None = None
    status: RoundStatus = RoundStatus.PENDING
    candidates: list[FeatureMap] = dataclasses.field(default_factory=list)
    candidate_set_id: str = ''
    candidate_path: str = ''
    diagnostic: str = ''

    @property
    def split_hash(self) -> str:
        return Sha256Digest.digest(Sha256Digest.of_ids(self.sub_train) + Sha256Digest.of_ids(self.sub_test))

    def to_record(self) -> RoundRecord:
        if self.status != RoundStatus.COMPLETED or self.decision is None or self.accuracy_a is None:
            raise errors.ContractError(msg='只有已完成的轮次可以写入账本', data=f'round={self.index}')
        return RoundRecord(
            index=self.index,
            split_hash=self.split_hash,
            accuracy_a=self.accuracy_a,
            accuracy_b=self.accuracy_b,
            decision=self.decision,
            candidate_path=self.candidate_path,
            diagnostic=self.diagnostic,
        )


def gan_candidates(
    gan_config: GanConfig, label_set: Sequence[str], template: FeatureMap, seed: int = 0
) -> CandidateFn:
    """
    训练一个新的 GAN 并从各快照采样, 样本按场景均衡

    :param template: 真实特征图, 候选沿用它的帧参数、声道编码、特征类型与来源 metadata
    """

    def generate(sub_train: LabeledFeatures, count_per_class: int, scenes: Sequence[str],
                 rng: np.random.Generator) -> list[FeatureMap]:
        triple = GanTriple(sub_train.features.shape[1:], len(label_set), gan_config, seed=seed)
        history = train_gan(triple, sub_train.features, sub_train.labels, gan_config, rng)
        return sample_fakes(triple, scenes, count_per_class, rng, epoch_tags=sorted(history.snapshots),
                            snapshots=history.snapshots, template=template, label_set=label_set)

    return generate


def _reject(record: AugmentationRound, diagnostic: str) -> AugmentationRound:
    record.decision, record.status, record.diagnostic = RoundDecision.REJECTED, RoundStatus.COMPLETED, diagnostic
    return record


def _train_and_score(
    factory: ClassifierFactory,
    train: LabeledFeatures,
    val: LabeledFeatures,
    test: LabeledFeatures,
    train_config: TrainConfig,
    seed: int,
) -> float:
    net = factory(seed)
    train_model(net, train, val, train_config, seed=seed)
    return evaluate(net, test).accuracy


def run_round(
    db: AugmentedDatabase,
    factory: ClassifierFactory,
    candidate_fn: CandidateFn,
    train_config: TrainConfig,
    rng: np.random.Generator,
    index: int = 0,
    candidate_fraction: float = settings.GAN_CANDIDATE_FRACTION,
    candidate_dir: str | os.PathLike | None = None,
) -> AugmentationRound:
    """
    执行一轮筛选, 不修改 db

    :param factory: seed -> 新分类器, A 与 B 使用同一个 seed
    :param candidate_fn: (sub-train 真实片段, 每类数量, 场景, rng) -> 候选特征图
    :param candidate_dir: 给出时把候选写成 SCNF1 缓存
    """
    if not len(db.real):
        raise errors.InputError(msg='数据库为空')
    seed = child_seed(rng)
    sub_train_real, sub_test = city_split(db.real, rng)
    record = AugmentationRound(index=index, sub_train=sub_train_real.clip_ids, sub_test=sub_test.clip_ids)

    train_index, val_index = validation_split(sub_train_real.labels, sub_train_real.cities,
                                              train_config.val_fraction, rng)
    val = sub_train_real.subset(val_index)
    train_a = sub_train_real.subset(train_index)
    fakes = db.fake_features()
    if fakes is not None:
        train_a = train_a.concat(fakes)
    record.accuracy_a = _train_and_score(factory, train_a, val, sub_test, train_config, seed)

    scenes = [db.label_set[k] for k in np.unique(sub_train_real.labels)]
    count_per_class = max(1, int(round(candidate_fraction * len(sub_train_real) / len(scenes))))
    try:
        candidates = candidate_fn(sub_train_real, count_per_class, scenes, rng)
    except errors.GanDivergenceError as e:
        _reject(record, str(e))
        log.warning(f'第 {index} 轮 GAN 发散, 候选作废: {e}')
        return record

    if not candidates:
        return _reject(record, '没有候选样本')
    for map_ in candidates:
        map_.metadata['round'] = str(index)
    record.candidates = candidates
    record.candidate_set_id = Sha256Digest.digest('|'.join(Sha256Digest.of_array(m.data) for m in candidates))
    ids = [f'cand-r{index}-{i}' for i in range(len(candidates))]
    candidate_set = LabeledFeatures.from_feature_maps(
        candidates, [m.metadata['scene'] for m in candidates], ids, db.label_set
    )
    if db.n_cities:
        candidate_set.cities = np.arange(len(candidates)) % db.n_cities
    record.accuracy_b = _train_and_score(factory, train_a.concat(candidate_set), val, sub_test, train_config, seed)
    record.decision = RoundDecision.ACCEPTED if record.accuracy_b > record.accuracy_a else RoundDecision.REJECTED
    record.status = RoundStatus.COMPLETED

    if candidate_dir is not None:
        directory = os.path.join(os.fspath(candidate_dir), f'round{index}')
        for i, map_ in enumerate(candidates):
            write_feature_cache(map_, os.path.join(directory, f'{i:05d}-{map_.metadata["scene"]}.scnf'))
        record.candidate_path = directory
    log.info(
        f'第 {index} 轮: A={record.accuracy_a:.4f}, B={record.accuracy_b:.4f}, '
        f'{len(candidates)} 个候选, {record.decision.value}'
    )
    return record


def apply_decision(db: AugmentedDatabase, round_: AugmentationRound) -> AugmentedDatabase:
    """
    接受时把候选加入数据库, 拒绝时原样返回

    同一轮重复应用是空操作 (记 warning)。
    """
    if round_.status != RoundStatus.COMPLETED or round_.decision is None:
        raise errors.ContractError(msg='轮次尚未完成', data=f'round={round_.index}, status={round_.status}')
    if round_.decision == RoundDecision.REJECTED:
        return db
    if round_.index in db.accepted_rounds:
        log.warning(f'第 {round_.index} 轮的候选已经加入数据库, 忽略重复应用')
        return db
    fake_set = FakeSet(round_index=round_.index, maps=tuple(round_.candidates), set_id=round_.candidate_set_id)
    return dataclasses.replace(db, fake_sets=db.fake_sets + (fake_set,))


def run_rounds(
    db: AugmentedDatabase,
    factory: ClassifierFactory,
    candidate_fn: CandidateFn,
    train_config: TrainConfig,
    config: AugmentConfig,
    ledger_path: str | os.PathLike | None = None,
    candidate_dir: str | os.PathLike | None = None,
    seed: int = 0,
) -> tuple[AugmentedDatabase, list[AugmentationRound]]:
    """按顺序执行多轮, 每轮基于上一轮的数据库"""
    rounds = []
    for index in range(config.rounds):
        rng = named_rng(seed, f'augment:round{index}')
        round_ = run_round(db, factory, candidate_fn, train_config, rng, index, config.candidate_fraction,
                           candidate_dir)
        db = apply_decision(db, round_)
        if ledger_path is not None:
            append_record(ledger_path, round_.to_record())
        rounds.append(round_)
    return db, rounds
