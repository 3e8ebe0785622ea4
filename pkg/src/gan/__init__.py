#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : __init__.py
# @Software: Cursor
# @Description: ACGAN 与 CVAE/ACGAN 数据增强模型
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
from src.gan.networks import Discriminator, Encoder, GanTriple, Generator
from src.gan.sampling import sample_fakes
from src.gan.trainer import GanHistory, GanLossReport, GanOptimizers, gan_train_step, train_gan

__all__ = [
    'Discriminator',
    'Encoder',
    'GanConfig',
    'GanHistory',
    'GanLossReport',
    'GanOptimizers',
    'GanTriple',
    'Generator',
    'LossParts',
    'LossWeights',
    'gan_train_step',
    'loss_acgan',
    'loss_cvae_acgan',
    'loss_generator_adv',
    'loss_kl',
    'loss_real_fake',
    'loss_reco',
    'loss_scene',
    'reparameterize',
    'sample_fakes',
    'train_gan',
]
