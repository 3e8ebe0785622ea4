#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : trainer.py
# @Software: Cursor
# @Description: GAN 交替训练
import dataclasses
import math

import msgspec
import numpy as np

from src.common.enums import GanMode
from src.common.logger import log
from src.core.exceptions import errors
from src.engine.tensor import Tape, Tensor, backward, no_tape
from src.gan.config import GanConfig, LossWeights
from src.gan.losses import (
    LossParts,
    loss_acgan,
    loss_cvae_acgan,
    loss_generator_adv,
    loss_kl,
    loss_real_fake,
    loss_reco,
    loss_scene,
    reparameterize,
)
from src.gan.networks import GanTriple
from src.training.optim import Adam


class GanLossReport(msgspec.Struct):
    """单步损失, CVAE 专有项在 ACGAN 模式下为 None"""
    real_fake: float
    scene: float
    gen_adv: float
    dis_loss: float
    gen_loss: float
    kl: float | None = None
    reco: float | None = None
    enc_loss: float | None = None

    def values(self) -> dict[str, float]:
        return {k: v for k, v in msgspec.structs.asdict(self).items() if v is not None}


@dataclasses.dataclass
class GanOptimizers:
    discriminator: Adam
    generator: Adam
    encoder: Adam | None = None

    @classmethod
    def for_triple(cls, triple: GanTriple, lr: float) -> 'GanOptimizers':
        return cls(
            discriminator=Adam(triple.role_parameters('discriminator'), lr=lr),
            generator=Adam(triple.role_parameters('generator'), lr=lr),
            encoder=Adam(triple.role_parameters('encoder'), lr=lr) if triple.encoder is not None else None,
        )


def _gradients_of(loss: Tensor, triple: GanTriple, optimizer: Adam) -> list[np.ndarray | None]:
    """只保留 optimizer 管理的参数上的梯度"""
    triple.zero_grad()
    backward(loss)
    return [None if p.grad is None else p.grad.copy() for _, p in optimizer.params]


def _apply(optimizer: Adam, grads: list[np.ndarray | None], role: str) -> None:
    """非有限梯度视为 GAN 发散"""
    for (_, p), grad in zip(optimizer.params, grads):
        p.grad = grad
    try:
        optimizer.step()
    except errors.GanDivergenceError:
        raise
    except errors.TrainingError as e:
        raise errors.GanDivergenceError(msg=f'{role} 梯度出现非有限值', data=e.data) from e


def _check_finite(values: dict[str, float]) -> None:
    bad = {k: v for k, v in values.items() if not math.isfinite(v)}
    if bad:
        raise errors.GanDivergenceError(data={'non_finite': sorted(bad), **values})


def gan_train_step(
    triple: GanTriple,
    real_batch: np.ndarray,
    labels: np.ndarray,
    w: LossWeights,
    mode: GanMode,
    optimizers: GanOptimizers,
    rng: np.random.Generator,
) -> GanLossReport:
    """
    一次判别器更新, 接着一次生成器 (CVAE 模式下连同编码器) 更新

    :param real_batch: 原始尺度特征 (batch, L, c, n)
    :param labels: 场景下标, 生成样本以相同标签为条件
    """
    if len(real_batch) < 2:
        raise errors.DegenerateBatchError(data=f'GAN 训练需要 batch ≥ 2, 得到 {len(real_batch)}')
    mode = GanMode(mode)
    eps = triple.config.score_eps
    labels = np.asarray(labels)
    real = triple.to_image(real_batch)
    batch = len(real_batch)
    triple.train()

    # 判别器
    z = Tensor(rng.standard_normal((batch, triple.noise_dim)))
    with no_tape():
        fake = Tensor(triple.generator(labels, z).data)
    with Tape():
        out_real = triple.discriminator(real)
        out_fake = triple.discriminator(fake)
        real_fake = loss_real_fake(out_real.score, out_fake.score, eps)
        scene = loss_scene(out_real.scene_logits, out_fake.scene_logits, labels)
        dis_loss = -real_fake + (w.gamma if mode == GanMode.ACGAN else w.gamma1) * scene
    # 判别器更新前检查, 发散时参数保持不变
    _check_finite({'real_fake': real_fake.item(), 'scene': scene.item(), 'dis_loss': dis_loss.item()})
    _apply(optimizers.discriminator, _gradients_of(dis_loss, triple, optimizers.discriminator), 'discriminator')

    # 生成器 (+ 编码器)
    z = Tensor(rng.standard_normal((batch, triple.noise_dim)))
    with Tape():
        out_real = triple.discriminator(real)
        out_fake = triple.discriminator(triple.generator(labels, z))
        parts = LossParts(
            real_fake=loss_real_fake(out_real.score, out_fake.score, eps),
            gen_adv=loss_generator_adv(out_fake.score, eps),
            scene=loss_scene(out_real.scene_logits, out_fake.scene_logits, labels),
        )
        if mode == GanMode.CVAE:
            mu, logvar = triple.encoder(real)  # type: ignore[misc]
            reconstructed = triple.generator(labels, reparameterize(mu, logvar, rng))
            layer = triple.config.feature_layer
            parts.kl = loss_kl(mu, logvar)
            parts.reco = loss_reco(out_real.features[layer], triple.discriminator(reconstructed).features[layer])
            enc_loss, gen_loss, _ = loss_cvae_acgan(parts, w)
        else:
            enc_loss = None
            gen_loss, _ = loss_acgan(parts, w)

    report = GanLossReport(
        real_fake=parts.real_fake.item(),
        scene=parts.scene.item(),
        gen_adv=parts.gen_adv.item(),
        dis_loss=dis_loss.item(),
        gen_loss=gen_loss.item(),
        kl=None if parts.kl is None else parts.kl.item(),
        reco=None if parts.reco is None else parts.reco.item(),
        enc_loss=None if enc_loss is None else enc_loss.item(),
    )
    _check_finite(report.values())
    gen_grads = _gradients_of(gen_loss, triple, optimizers.generator)
    if enc_loss is not None and optimizers.encoder is not None:
        _apply(optimizers.encoder, _gradients_of(enc_loss, triple, optimizers.encoder), 'encoder')
    _apply(optimizers.generator, gen_grads, 'generator')
    triple.zero_grad()
    for _, p in triple.named_parameters():
        if not np.all(np.isfinite(p.data)):
            raise errors.GanDivergenceError(msg='参数更新后出现非有限值', data=report.values())
    return report


@dataclasses.dataclass
class GanHistory:
    """逐 epoch 平均损失与生成器快照"""
    epochs: list[dict[str, float]] = dataclasses.field(default_factory=list)
    snapshots: dict[int, dict[str, np.ndarray]] = dataclasses.field(default_factory=dict)


def generator_state(triple: GanTriple) -> dict[str, np.ndarray]:
    return {name: value for name, value in triple.state_dict().items() if name.startswith('generator.')}


def train_gan(
    triple: GanTriple,
    features: np.ndarray,
    labels: np.ndarray,
    config: GanConfig,
    rng: np.random.Generator,
) -> GanHistory:
    """
    按 epoch 打乱后交替训练, 在 snapshot_epochs 保存生成器参数

    特征标准化参数由全部训练特征拟合。
    """
    if len(features) < 2:
        raise errors.InputError(msg='GAN 训练集至少需要 2 个样本', data=f'n={len(features)}')
    triple.fit_standardization(features)
    optimizers = GanOptimizers.for_triple(triple, config.lr)
    history = GanHistory()
    batch_size = min(config.batch_size, len(features))
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(features))
        reports = []
        for start in range(0, len(order), batch_size):
            index = order[start:start + batch_size]
            if len(index) < 2:
                continue
            reports.append(
                gan_train_step(triple, features[index], labels[index], config.weights, config.mode, optimizers, rng)
            )
        summary = {key: float(np.mean([r.values()[key] for r in reports])) for key in reports[0].values()}
        history.epochs.append(summary)
        log.info(
            f'GAN epoch {epoch}/{config.epochs}: '
            + ', '.join(f'{key}={value:.4f}' for key, value in summary.items())
        )
        if epoch in config.snapshot_epochs:
            history.snapshots[epoch] = generator_state(triple)
    if not history.snapshots:
        history.snapshots[config.epochs] = generator_state(triple)
    return history
