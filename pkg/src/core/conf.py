from functools import lru_cache
from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict

from src.core.path_conf import ProjectPath


class Settings(BaseSettings):
    """Global Settings"""
    model_config = SettingsConfigDict(
        env_file=f'{ProjectPath}/.env',
        env_file_encoding='utf-8',
        extra='ignore'
    )

    # 项目名称
    PROJECT_NAME: str = "scene_gan"
    # 项目版本
    VERSION: str = "1.0.0"
    # 项目描述
    DESCRIPTION: str = "声学场景分类: 特征提取、GAN 增强、分类器训练与融合"

    # 场景标签 (DCASE2019 Task1A)
    SCENE_LABELS: list[str] = [
        'airport',
        'bus',
        'metro',
        'metro_station',
        'park',
        'public_square',
        'shopping_mall',
        'street_pedestrian',
        'street_traffic',
        'tram',
    ]

    # 自动微分
    ENGINE_DTYPE: Literal['float32', 'float64'] = 'float32'
    BN_EPS: float = 1e-5
    BN_MOMENTUM: float = 0.1

    # 音频
    SAMPLE_RATE: int = 48000
    LOG_FLOOR: float = 1e-10
    DELTA_WIDTH: int = 2
    # 提取特征的最短时长 (秒)
    FEATURE_MIN_DURATION_S: float = 1.0

    # FBank
    FBANK_WIN_MS: float = 40.0
    FBANK_HOP_MS: float = 20.0
    FBANK_N_FILTERS: int = 128
    FBANK_DELTA_ORDER: int = 2

    # Scalogram, 175ms 使 10s 片段恰好得到 58 帧
    SCALOGRAM_WIN_MS: float = 555.0
    SCALOGRAM_HOP_MS: float = 175.0
    SCALOGRAM_N_FILTERS: int = 290
    SCALOGRAM_LINEAR_SPACING_HZ: float = 20.0

    # Adam
    ADAM_LR: float = 1e-3
    ADAM_BETA1: float = 0.9
    ADAM_BETA2: float = 0.999
    ADAM_EPS: float = 1e-8

    # 训练
    TRAIN_MAX_EPOCHS: int = 200
    TRAIN_PATIENCE: int = 5
    TRAIN_LR_DECAY_PATIENCE: int = 2
    TRAIN_LR_DECAY_FACTOR: float = 0.5
    TRAIN_LR_FLOOR: float = 1e-5
    TRAIN_BATCH_SIZE: int = 32
    TRAIN_SEEDS: list[int] = [0, 1, 2]
    TRAIN_VAL_FRACTION: float = 0.1

    # GAN
    GAN_NOISE_DIM: int = 64
    GAN_EPOCHS: int = 50
    GAN_SNAPSHOT_EPOCHS: list[int] = [30, 40, 50]
    GAN_BATCH_SIZE: int = 32
    GAN_SCORE_EPS: float = 1e-7
    GAN_CANDIDATE_FRACTION: float = 0.25
    # 损失权重 (ACGAN 的 γ, CVAE/ACGAN 的 γ1 γ2 γ3)
    GAN_GAMMA: float = 1.0
    GAN_GAMMA1: float = 1.0
    GAN_GAMMA2: float = 1.0
    GAN_GAMMA3: float = 1.0
    # 判别器/生成器通道基数 (分类器的一半)
    GAN_WIDTH: int = 7
    GAN_HIDDEN: int = 128
    GAN_EMBED_DIM: int = 16

    # 城市对抗分支
    CITY_ADVERSARY_LAMBDA: float = 1.0
    CITY_ADVERSARY_HIDDEN: int = 256

    # 融合
    ENSEMBLE_GRID_STEP: float = 0.05

    # 城市划分穷举上限
    CITY_SPLIT_EXHAUSTIVE_MAX: int = 12

    # Log
    LOG_ROOT_LEVEL: str = 'NOTSET'
    LOG_STD_FORMAT: str = (
        '<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</> | <lvl>{level: <8}</> | '
        '<cyan> {run_id} </> | <lvl>{message}</>'
    )
    LOG_LOGURU_FORMAT: str = (
        '<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</> | <lvl>{level: <8}</> | '
        '<cyan> {run_id} </> | <lvl>{message}</>'
    )
    LOG_RUN_ID_DEFAULT_VALUE: str = '-'
    LOG_RUN_ID_LENGTH: int = 12
    LOG_STDOUT_LEVEL: str = 'INFO'
    LOG_STDERR_LEVEL: str = 'WARNING'
    LOG_STDOUT_FILENAME: str = 'scene_gan_access.log'
    LOG_STDERR_FILENAME: str = 'scene_gan_error.log'


@lru_cache
def get_settings() -> Settings:
    """获取全局配置"""
    return Settings()


# 创建配置实例
settings = get_settings()
