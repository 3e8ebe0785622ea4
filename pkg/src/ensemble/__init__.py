#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : __init__.py
# @Software: Cursor
# @Description: 分类器融合
from src.ensemble.config import EnsembleConfig
from src.ensemble.io import read_predictions, write_predictions
from src.ensemble.voting import align, average_vote, fuse_probs, weighted_vote
from src.ensemble.weights import fit_weights

__all__ = [
    'EnsembleConfig',
    'align',
    'average_vote',
    'fit_weights',
    'fuse_probs',
    'read_predictions',
    'weighted_vote',
    'write_predictions',
]
