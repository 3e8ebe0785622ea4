#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : __init__.py
# @Software: Cursor
# @Description: 场景分类网络
from src.models.blocks import InceptionModule, build_inception_module, dct_temporal_head
from src.models.checkpoint import load_checkpoint, save_checkpoint
from src.models.config import ClassifierConfig
from src.models.dcnn import DCNN, attach_city_adversary, build_dcnn
from src.models.fcnn import FCNN, build_fcnn
from src.models.hybrid import HybridNet, build_hybrid
from src.models.network import Network, aggregate_frames, segment_predict
from src.models.registry import build_classifier, build_from_spec
from src.models.spec import LayerSpec, NetworkSpec

__all__ = [
    'DCNN',
    'FCNN',
    'ClassifierConfig',
    'HybridNet',
    'InceptionModule',
    'LayerSpec',
    'Network',
    'NetworkSpec',
    'aggregate_frames',
    'attach_city_adversary',
    'build_classifier',
    'build_dcnn',
    'build_fcnn',
    'build_from_spec',
    'build_hybrid',
    'build_inception_module',
    'dct_temporal_head',
    'load_checkpoint',
    'save_checkpoint',
    'segment_predict',
]
