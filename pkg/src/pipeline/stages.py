#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : stages.py
# @Software: Cursor
# @Description: 流水线各阶段
"""
输出目录布局::

    data/                     合成数据集 (未给出清单时)
    features/<特征标识>/      SCNF1 特征缓存
    augment/<系统名>/         ledger.jsonl 与 candidates/round<k>/
    models/<系统名>/          seed<s>.scnc, history-seed<s>.csv
    predictions/<系统名>/     seed<s>.csv
    predictions/<系统名>.csv  多 seed 平均
    fusion/<融合名>.conf      实际使用的融合配置
    results/<系统名>.json     准确率与混淆矩阵
    report.txt
"""
import dataclasses
import functools
import glob
import os
import shutil

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import msgspec
import numpy as np

from src.augment import AugmentedDatabase, FakeSet, gan_candidates, read_ledger, run_rounds
from src.common.dataclasses import Clip, FeatureMap, PredictionRecord
from src.common.enums import AugScheme, Fold, RoundDecision, Stage, VoteMethod
from src.common.logger import log
from src.core.exceptions import errors
from src.dataset import DatasetManifest, load_or_extract, make_mini_dataset, parse_manifest
from src.ensemble import average_vote, fit_weights, read_predictions, weighted_vote, write_predictions
from src.features.cache import read_feature_cache
from src.features.config import FeatureConfig
from src.models import build_classifier, load_checkpoint, save_checkpoint
from src.models.network import Network
from src.pipeline.config import PipelineConfig
from src.pipeline.report import report
from src.training import LabeledFeatures, confusion_matrix, train_model, validation_split, write_history
from src.utils.file_ops import atomic_write_bytes, atomic_write_text
from src.utils.hashing import Sha256Digest
from src.utils.rng import named_rng


class EvalResult(msgspec.Struct):
    name: str
    accuracy: float | None
    clips: int
    confusion: list[list[int]]


@dataclasses.dataclass
class PipelineContext:
    """一次运行的配置与输出路径"""
    config: PipelineConfig
    _manifest: DatasetManifest | None = None

    @property
    def out(self) -> str:
        return self.config.paths.out

    def path(self, *parts: str) -> str:
        return os.path.join(self.out, *parts)

    @property
    def system(self) -> str:
        return self.config.system_name

    @property
    def feature_dir(self) -> str:
        feature = self.config.feature
        tag = Sha256Digest.of_config(feature.model_dump(mode='json'))[:8]
        return self.path('features', f'{feature.kind.value}-{feature.channel_mode.value}-{tag}')

    @property
    def augment_dir(self) -> str:
        return self.path('augment', self.system)

    @property
    def model_dir(self) -> str:
        return self.path('models', self.system)

    @property
    def manifest(self) -> DatasetManifest:
        if self._manifest is None:
            self._manifest = parse_manifest(self.config.manifest_path)
        return self._manifest

    @property
    def train_cities(self) -> list[str]:
        return sorted({clip.city for clip in self.manifest.fold(Fold.TRAIN)})

    def eval_labels(self) -> dict[str, int]:
        manifest = self.manifest
        return {clip.id: manifest.label_index(clip.scene) for clip in manifest.fold(Fold.EVALUATE)}

    def features(self, fold: Fold, with_cities: bool = False) -> LabeledFeatures:
        clips = self.manifest.fold(fold)
        if not clips:
            raise errors.IngestionError(msg=f'清单中没有 {fold.value} 片段', data=self.config.manifest_path)
        maps = [load_or_extract(clip, self.config.feature, self.feature_dir) for clip in clips]
        return LabeledFeatures.from_feature_maps(
            maps,
            [clip.scene for clip in clips],
            [clip.id for clip in clips],
            self.manifest.label_set,
            cities=[clip.city for clip in clips] if with_cities else None,
            city_set=self.train_cities if with_cities else None,
        )

    def feature_template(self) -> FeatureMap:
        """训练折第一个片段的特征图, 生成样本沿用它的帧参数与特征来源"""
        return load_or_extract(self.manifest.fold(Fold.TRAIN)[0], self.config.feature, self.feature_dir)

    def classifier_factory(self, input_shape: tuple[int, int, int]) -> Callable[[int], Network]:
        return functools.partial(
            build_classifier,
            self.config.classifier,
            input_shape,
            len(self.manifest.label_set),
            len(self.train_cities),
        )


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    """jobs > 1 时用进程池, 结果顺序与输入一致"""
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))


def make_data(ctx: PipelineContext) -> None:
    if ctx.config.paths.manifest:
        log.info(f'使用已有清单 {ctx.config.paths.manifest}, 不生成合成数据')
        return
    data = ctx.config.data
    make_mini_dataset(
        ctx.path('data'),
        named_rng(ctx.config.seed, 'mkdata'),
        clips_per_pair=data.clips_per_pair,
        duration_s=data.duration_s,
        sample_rate=data.sample_rate or ctx.config.feature.sample_rate,
    )


def _extract_clip(clip: Clip, config: FeatureConfig, cache_dir: str) -> tuple[int, int, int]:
    return load_or_extract(clip, config, cache_dir).shape


def extract_features(ctx: PipelineContext) -> None:
    clips = ctx.manifest.clips
    fn = functools.partial(_extract_clip, config=ctx.config.feature, cache_dir=ctx.feature_dir)
    shapes = set(_map(fn, clips, ctx.config.jobs))
    if len(shapes) != 1:
        raise errors.ShapeError(msg='片段的特征图形状不一致, 检查音频时长', data=[str(s) for s in sorted(shapes)])
    log.info(f'{len(clips)} 个片段的特征已缓存到 {ctx.feature_dir}, 形状 {shapes.pop()}')


def augment_database(ctx: PipelineContext) -> None:
    config = ctx.config
    if config.scheme == AugScheme.NONE:
        log.info('增强方案为 none, 跳过增强')
        return
    shutil.rmtree(ctx.augment_dir, ignore_errors=True)
    real = ctx.features(Fold.TRAIN, with_cities=True)
    label_set = tuple(ctx.manifest.label_set)
    db = AugmentedDatabase(real=real, label_set=label_set, n_cities=len(ctx.train_cities))
    db, rounds = run_rounds(
        db,
        ctx.classifier_factory(real.features.shape[1:]),
        gan_candidates(config.gan, label_set, ctx.feature_template(), seed=config.seed),
        config.train,
        config.augment,
        ledger_path=os.path.join(ctx.augment_dir, 'ledger.jsonl'),
        candidate_dir=os.path.join(ctx.augment_dir, 'candidates'),
        seed=config.seed,
    )
    accepted = sum(r.decision == RoundDecision.ACCEPTED for r in rounds)
    log.info(f'增强完成: {len(rounds)} 轮, 接受 {accepted} 轮, 生成样本 {db.fake_count} 个')


def accepted_fakes(ctx: PipelineContext) -> tuple[FakeSet, ...]:
    """按账本读回被接受轮次的生成样本"""
    if ctx.config.scheme == AugScheme.NONE:
        return ()
    fake_sets = []
    for record in read_ledger(os.path.join(ctx.augment_dir, 'ledger.jsonl')):
        if record.decision != RoundDecision.ACCEPTED:
            continue
        files = sorted(glob.glob(os.path.join(record.candidate_path, '*.scnf')))
        if not files:
            raise errors.IngestionError(msg='被接受轮次的生成样本缺失', data=record.candidate_path)
        maps: tuple[FeatureMap, ...] = tuple(read_feature_cache(f) for f in files)
        fake_sets.append(FakeSet(round_index=record.index, maps=maps))
    return tuple(fake_sets)


def _train_seed(seed: int, ctx: PipelineContext, real: LabeledFeatures, fakes: LabeledFeatures | None) -> str:
    config = ctx.config
    train_index, val_index = validation_split(
        real.labels, real.cities, config.train.val_fraction, named_rng(seed, 'pipeline:validation')
    )
    train = real.subset(train_index)
    if fakes is not None:
        train = train.concat(fakes)
    net = ctx.classifier_factory(real.features.shape[1:])(seed)
    result = train_model(net, train, real.subset(val_index), config.train, seed=seed)
    path = os.path.join(ctx.model_dir, f'seed{seed}.scnc')
    save_checkpoint(net, path)
    write_history(result.history, os.path.join(ctx.model_dir, f'history-seed{seed}.csv'))
    log.info(f'{ctx.system} seed {seed}: best epoch {result.best_epoch}, val loss {result.best_val_loss:.4f}')
    return path


def train_classifiers(ctx: PipelineContext) -> None:
    real = ctx.features(Fold.TRAIN, with_cities=True)
    db = AugmentedDatabase(real=real, label_set=tuple(ctx.manifest.label_set), fake_sets=accepted_fakes(ctx),
                           n_cities=len(ctx.train_cities))
    if db.fake_count:
        log.info(f'训练集包含 {db.fake_count} 个生成样本 (轮次 {db.accepted_rounds})')
    fn = functools.partial(_train_seed, ctx=ctx, real=real, fakes=db.fake_features())
    _map(fn, list(ctx.config.train.seeds), ctx.config.jobs)


def predict_eval(ctx: PipelineContext) -> None:
    data = ctx.features(Fold.EVALUATE)
    per_seed = []
    for seed in ctx.config.train.seeds:
        net = load_checkpoint(os.path.join(ctx.model_dir, f'seed{seed}.scnc'))
        probs = net.predict_clips(data.features)
        records = [PredictionRecord(clip_id=c, probs=p, classifier_id=ctx.system, seed_id=seed)
                   for c, p in zip(data.clip_ids, probs)]
        write_predictions(records, ctx.path('predictions', ctx.system, f'seed{seed}.csv'), ctx.manifest.label_set)
        per_seed.append(records)
    fused = average_vote(per_seed, name=ctx.system)
    write_predictions(fused, ctx.path('predictions', f'{ctx.system}.csv'), ctx.manifest.label_set)
    log.info(f'{ctx.system}: {len(fused)} 个评估片段, {len(per_seed)} 个 seed 平均')


def fuse_systems(ctx: PipelineContext) -> None:
    fusion = ctx.config.fusion
    if fusion is None:
        log.info('未配置融合, 跳过')
        return
    label_set = ctx.manifest.label_set
    members = [read_predictions(ctx.path('predictions', f'{m}.csv'), label_set=label_set) for m in fusion.members]
    if fusion.method == VoteMethod.AVERAGE:
        fused = average_vote(members, name=fusion.name)
    else:
        weights = fusion.weights
        if weights is None:
            weights = fit_weights(members, ctx.eval_labels()).tolist()
        fusion = fusion.model_copy(update={'weights': weights})
        fused = weighted_vote(members, weights, name=fusion.name)
    write_predictions(fused, ctx.path('predictions', f'{fusion.name}.csv'), label_set)
    fusion.write(ctx.path('fusion', f'{fusion.name}.conf'))


def evaluate_predictions(ctx: PipelineContext) -> None:
    labels = ctx.eval_labels()
    n_classes = len(ctx.manifest.label_set)
    for path in sorted(glob.glob(ctx.path('predictions', '*.csv'))):
        records = read_predictions(path)
        name = os.path.splitext(os.path.basename(path))[0]
        scored = [r for r in records if r.clip_id in labels]
        confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
        if scored:
            confusion = confusion_matrix([labels[r.clip_id] for r in scored], [r.label for r in scored], n_classes)
        accuracy = float(np.trace(confusion) / len(scored)) if scored else None
        result = EvalResult(name=name, accuracy=accuracy, clips=len(records), confusion=confusion.tolist())
        atomic_write_bytes(ctx.path('results', f'{name}.json'), msgspec.json.encode(result))
        log.info(f'{name}: accuracy={"n/a" if accuracy is None else f"{accuracy:.4f}"} ({len(scored)} 个带标签片段)')


def write_report(ctx: PipelineContext) -> None:
    try:
        labels = ctx.eval_labels()
    except errors.IngestionError:
        log.warning('无法读取清单, 报告中的准确率记为 n/a')
        labels = {}
    text = report(ctx.path('predictions'), labels, ctx.path('fusion'))
    atomic_write_text(ctx.path('report.txt'), text)
    log.info(f'报告已写入 {ctx.path("report.txt")}')


STAGES: dict[Stage, Callable[[PipelineContext], None]] = {
    Stage.MKDATA: make_data,
    Stage.EXTRACT: extract_features,
    Stage.AUGMENT: augment_database,
    Stage.TRAIN: train_classifiers,
    Stage.PREDICT: predict_eval,
    Stage.FUSE: fuse_systems,
    Stage.EVAL: evaluate_predictions,
    Stage.REPORT: write_report,
}
