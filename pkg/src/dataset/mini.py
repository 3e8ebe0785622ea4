#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : mini.py
# @Software: Cursor
# @Description: 合成迷你数据集
"""
桌面规模的合成数据

10 个场景 × 4 个城市 × 每组 2 个片段 = 80 个立体声 WAV。每个场景由一段带通噪声
(中心频率按场景几何递增)、两个幅度调制的纯音以及场景相关的左右声道相关度组成;
城市只改变整体增益和底噪, 不改变场景可分性。
"""
import os

from typing import Sequence

import numpy as np

from scipy import signal

from src.common.dataclasses import Clip
from src.common.enums import Fold
from src.common.logger import log
from src.core.conf import settings
from src.dataset.audio import write_wav
from src.dataset.manifest import DatasetManifest, write_manifest
from src.utils.rng import child_seed

MINI_CITIES = ('barcelona', 'helsinki', 'lisbon', 'london')
MANIFEST_NAME = 'meta.csv'


def _scene_clip(scene: int, city: int, n_scenes: int, n: int, sample_rate: int, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(n) / sample_rate
    nyquist = sample_rate / 2

    # 带通噪声, 中心频率 250 Hz 起按场景几何递增, 上限留出 nyquist 余量
    top = min(8000.0, 0.7 * nyquist)
    center = 250.0 * (top / 250.0) ** (scene / max(n_scenes - 1, 1))
    band = np.array([center / 2 ** (1 / 3), min(center * 2 ** (1 / 3), 0.95 * nyquist)])
    sos = signal.butter(4, band, btype='bandpass', fs=sample_rate, output='sos')
    left = signal.sosfilt(sos, rng.standard_normal(n))
    independent = signal.sosfilt(sos, rng.standard_normal(n))
    rho = scene / max(n_scenes - 1, 1)
    right = rho * left + np.sqrt(1 - rho ** 2) * independent
    noise = np.stack([left, right], axis=1)
    noise /= np.max(np.abs(noise)) + 1e-12

    # 两个调幅纯音
    base = 110.0 * (scene + 2) * (1 + 0.03 * rng.uniform(-1, 1))
    rate = 0.5 + 0.4 * scene
    envelope = 0.5 * (1 + np.sin(2 * np.pi * rate * t + rng.uniform(0, 2 * np.pi)))
    tones = envelope * (
        np.sin(2 * np.pi * base * t + rng.uniform(0, 2 * np.pi))
        + 0.5 * np.sin(2 * np.pi * 1.5 * base * t + rng.uniform(0, 2 * np.pi))
    )

    gain = 0.8 + 0.1 * city
    floor = 0.01 * (city + 1) * rng.standard_normal((n, 2))
    audio = gain * (0.6 * noise + 0.3 * tones[:, None]) + floor
    return 0.5 * audio / (np.max(np.abs(audio)) + 1e-12)


def make_mini_dataset(
    out_dir: str | os.PathLike,
    rng: np.random.Generator,
    clips_per_pair: int = 2,
    duration_s: float = 10.0,
    sample_rate: int | None = None,
    label_set: Sequence[str] | None = None,
    cities: Sequence[str] = MINI_CITIES,
) -> DatasetManifest:
    """
    生成合成数据集并写出清单

    文件名 audio/{scene}-{city}-{idx}-a.wav。每个 (场景, 城市) 的第 2 个片段在奇数序号城市上
    划入 evaluate, 其余为 train: 默认配置下每个场景 6 个训练、2 个评估片段。
    """
    label_set = list(label_set or settings.SCENE_LABELS)
    sample_rate = sample_rate or settings.SAMPLE_RATE
    n = int(round(duration_s * sample_rate))
    clips: list[Clip] = []
    for scene_index, scene in enumerate(label_set):
        for city_index, city in enumerate(cities):
            for idx in range(clips_per_pair):
                clip_rng = np.random.default_rng(child_seed(rng))
                audio = _scene_clip(scene_index, city_index, len(label_set), n, sample_rate, clip_rng)
                rel_path = f'audio/{scene}-{city}-{idx}-a.wav'
                path = os.path.join(os.fspath(out_dir), rel_path)
                write_wav(path, audio, sample_rate)
                fold = Fold.EVALUATE if idx == 1 and city_index % 2 == 1 else Fold.TRAIN
                clips.append(
                    Clip(id=os.path.splitext(os.path.basename(rel_path))[0], path=path, scene=scene, city=city,
                         duration=n / sample_rate, fold=fold)
                )
    manifest = DatasetManifest(clips=clips, label_set=label_set, root=os.path.abspath(out_dir))
    write_manifest(manifest, os.path.join(os.fspath(out_dir), MANIFEST_NAME))
    log.info(f'迷你数据集: {len(clips)} 个片段写入 {out_dir}')
    return manifest
