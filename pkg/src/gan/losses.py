#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : losses.py
# @Software: Cursor
# @Description: GAN 损失
"""
损失与各角色的优化目标

所有损失对 batch 求和。符号约定:

    real_fake  = Σ log D(x) + Σ log(1 − D(G(y, z)))        (≤ 0, 判别器最大化)
    gen_adv    = −Σ log D(G(y, z))                          (非饱和形式)
    scene      = CE(真实样本) + CE(生成样本, 条件标签)         (≥ 0, 双方最小化)

    ACGAN      dis = −real_fake + γ·scene
               gen = gen_adv + γ·scene
    CVAE/ACGAN dis = −real_fake + γ1·scene
               gen = gen_adv + γ1·scene + γ3·reco
               enc = γ2·kl + γ3·reco
"""
import dataclasses

import numpy as np

from src.common.logger import log
from src.core.conf import settings
from src.core.exceptions import errors
from src.engine import functional as F
from src.engine.layers import softmax_xent
from src.engine.tensor import Tensor
from src.gan.config import LossWeights


@dataclasses.dataclass
class LossParts:
    """单步的各项损失"""
    real_fake: Tensor
    gen_adv: Tensor
    scene: Tensor
    kl: Tensor | None = None
    reco: Tensor | None = None


def _clamped_log(scores: Tensor, eps: float, complement: bool = False) -> Tensor:
    data = scores.data
    if np.any(data <= eps) or np.any(data >= 1.0 - eps):
        log.warning(f'判别器分数触及 [ε, 1−ε] 边界 (ε={eps}), 已截断')
    clamped = F.clamp(scores, eps, 1.0 - eps)
    return F.log(1.0 - clamped) if complement else F.log(clamped)


def loss_real_fake(dis_real: Tensor, dis_fake: Tensor, eps: float = settings.GAN_SCORE_EPS) -> Tensor:
    """Σ log D(x) + Σ log(1 − D(G(y, z)))"""
    return F.sum(_clamped_log(dis_real, eps)) + F.sum(_clamped_log(dis_fake, eps, complement=True))


def loss_generator_adv(dis_fake: Tensor, eps: float = settings.GAN_SCORE_EPS) -> Tensor:
    """−Σ log D(G(y, z))"""
    return -F.sum(_clamped_log(dis_fake, eps))


def loss_scene(
    logits_real: Tensor, logits_fake: Tensor, labels_real: np.ndarray, labels_fake: np.ndarray | None = None
) -> Tensor:
    """辅助场景分类器在真实样本与生成样本上的交叉熵之和"""
    labels_fake = labels_real if labels_fake is None else labels_fake
    _, real = softmax_xent(logits_real, labels_real, reduction='sum')
    _, fake = softmax_xent(logits_fake, labels_fake, reduction='sum')
    return real + fake


def loss_kl(mu: Tensor, logvar: Tensor) -> Tensor:
    """KL(N(μ, diag exp(logvar)) ‖ N(0, I)) = ½ Σ (μ² + σ² − log σ² − 1)"""
    if mu.shape != logvar.shape:
        raise errors.ShapeError(msg='μ 与 logvar 形状不一致', data=f'{mu.shape} vs {logvar.shape}')
    return 0.5 * F.sum(mu * mu + F.exp(logvar) - logvar - 1.0)


def loss_reco(features_real: Tensor, features_reco: Tensor) -> Tensor:
    """判别器中间特征上的平方误差和"""
    if features_real.shape != features_reco.shape:
        raise errors.ShapeError(msg='重建特征形状不一致', data=f'{features_real.shape} vs {features_reco.shape}')
    diff = features_real - features_reco
    return F.sum(diff * diff)


def loss_acgan(parts: LossParts, w: LossWeights) -> tuple[Tensor, Tensor]:
    """返回 (gen_loss, dis_loss)"""
    scene = w.gamma * parts.scene
    return parts.gen_adv + scene, -parts.real_fake + scene


def loss_cvae_acgan(parts: LossParts, w: LossWeights) -> tuple[Tensor, Tensor, Tensor]:
    """返回 (enc_loss, gen_loss, dis_loss)"""
    if parts.kl is None or parts.reco is None:
        raise errors.ContractError(msg='CVAE/ACGAN 需要 KL 与重建损失')
    scene = w.gamma1 * parts.scene
    reco = w.gamma3 * parts.reco
    enc = w.gamma2 * parts.kl + reco
    return enc, parts.gen_adv + scene + reco, -parts.real_fake + scene


def reparameterize(mu: Tensor, logvar: Tensor, rng: np.random.Generator) -> Tensor:
    """z = μ + exp(½·logvar)·ε, ε ~ N(0, I)"""
    noise = rng.standard_normal(mu.shape).astype(mu.dtype)
    return mu + F.exp(0.5 * logvar) * noise
