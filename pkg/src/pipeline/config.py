#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# @File    : config.py
# @Software: Cursor
# @Description: 流水线配置
"""
流水线配置文件为扁平的 key=value 文本, 用点号前缀区分分节::

    seed=0
    scheme=acgan
    feature.kind=scalogram
    feature.channel_mode=ave-diff
    classifier.variant=dcnn
    train.max_epochs=50
    train.seeds=0,1,2
    gan.weights.gamma=1.0
    fusion.members=fbank-leftright-none-fcnn,scalogram-avediff-none-dcnn

列表字段用逗号分隔。未知键与无效值抛出 ConfigError, 消息中带点号路径。
"""
import inspect
import os
import types

from typing import Any, Mapping, Sequence, Union, get_args, get_origin

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.augment.protocol import AugmentConfig
from src.common.enums import AugScheme, GanMode, Stage
from src.core import path_conf
from src.core.exceptions import errors
from src.dataset.mini import MANIFEST_NAME
from src.ensemble.config import EnsembleConfig
from src.features.config import FeatureConfig
from src.gan.config import GanConfig
from src.models.config import ClassifierConfig
from src.training.config import TrainConfig
from src.utils.hashing import Sha256Digest
from src.utils.key_value import parse_key_values, read_key_value_file

SCHEME_TAGS = {AugScheme.NONE: 'none', AugScheme.ACGAN: 'ACGAN', AugScheme.CVAE_ACGAN: 'CVAE_ACGAN'}

# 每个阶段新引入的配置项; 阶段摘要同时覆盖它之前所有阶段的配置项
STAGE_KEYS: dict[Stage, tuple[str, ...]] = {
    Stage.MKDATA: ('seed', 'data', 'paths.manifest'),
    Stage.EXTRACT: ('feature',),
    Stage.AUGMENT: ('scheme', 'classifier', 'train', 'gan', 'augment'),
    Stage.TRAIN: (),
    Stage.PREDICT: (),
    Stage.FUSE: ('fusion',),
    Stage.EVAL: (),
    Stage.REPORT: (),
}


class MiniDataConfig(BaseModel):
    """未给出清单时生成的合成数据集"""
    clips_per_pair: int = Field(default=2, ge=1)
    duration_s: float = Field(default=10.0, gt=0.0)
    sample_rate: int | None = Field(default=None, gt=0)


class PathsConfig(BaseModel):
    # 空: 使用 mkdata 在输出目录下生成的数据集
    manifest: str = ''
    out: str = path_conf.OUTPUT_DIR


class PipelineConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    seed: int = 0
    jobs: int = Field(default=1, ge=1)
    scheme: AugScheme = AugScheme.NONE
    feature: FeatureConfig = Field(default_factory=FeatureConfig)
    classifier: ClassifierConfig = Field(default_factory=ClassifierConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    gan: GanConfig = Field(default_factory=GanConfig)
    augment: AugmentConfig = Field(default_factory=AugmentConfig)
    fusion: EnsembleConfig | None = None
    data: MiniDataConfig = Field(default_factory=MiniDataConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)

    @model_validator(mode='after')
    def sync_gan_mode(self) -> 'PipelineConfig':
        """GAN 模式由增强方案决定"""
        if self.scheme != AugScheme.NONE:
            mode = GanMode.CVAE if self.scheme == AugScheme.CVAE_ACGAN else GanMode.ACGAN
            if self.gan.mode != mode:
                self.gan = self.gan.model_copy(update={'mode': mode})
        return self

    @property
    def system_name(self) -> str:
        """{特征}-{声道}-{增强方案}-{分类器}"""
        channel = self.feature.channel_mode.value.replace('-', '')
        return f'{self.feature.kind.value}-{channel}-{SCHEME_TAGS[self.scheme]}-{self.classifier.variant.value}'

    @property
    def manifest_path(self) -> str:
        return self.paths.manifest or os.path.join(self.paths.out, 'data', MANIFEST_NAME)

    def flat(self) -> dict[str, str]:
        """展开成点号键, 与配置文件格式一致"""
        flat: dict[str, str] = {}

        def walk(prefix: str, value: Any) -> None:
            if isinstance(value, dict):
                for key, item in value.items():
                    walk(f'{prefix}.{key}' if prefix else key, item)
            elif isinstance(value, list):
                flat[prefix] = ','.join(str(v) for v in value)
            elif isinstance(value, bool):
                flat[prefix] = 'true' if value else 'false'
            elif value is not None:
                flat[prefix] = str(value)

        walk('', self.model_dump(mode='json'))
        return flat

    def stage_hash(self, stage: Stage) -> str:
        """阶段及其上游阶段依赖的配置摘要"""
        order = list(Stage)
        keys = [key for s in order[: order.index(stage) + 1] for key in STAGE_KEYS[s]]
        dumped = self.model_dump(mode='json')
        selected = {}
        for key in keys:
            value: Any = dumped
            for part in key.split('.'):
                value = value.get(part) if isinstance(value, dict) else None
            selected[key] = value
        return Sha256Digest.of_config(selected)


def _model_of(annotation: Any) -> type[BaseModel] | None:
    if inspect.isclass(annotation) and issubclass(annotation, BaseModel):
        return annotation
    if get_origin(annotation) in (Union, types.UnionType):
        for arg in get_args(annotation):
            if inspect.isclass(arg) and issubclass(arg, BaseModel):
                return arg
    return None


def _is_list(annotation: Any) -> bool:
    if get_origin(annotation) is list:
        return True
    return get_origin(annotation) in (Union, types.UnionType) and any(get_origin(a) is list for a in get_args(annotation))


def _assign(tree: dict[str, Any], model: type[BaseModel], parts: list[str], value: str, key: str) -> None:
    field = model.model_fields.get(parts[0])
    if field is None:
        raise errors.ConfigError(msg=f'未知配置项: {key}', data=key)
    section = _model_of(field.annotation)
    if len(parts) == 1:
        if section is not None:
            raise errors.ConfigError(msg=f'{key} 是分节, 需要写成 {key}.<字段>', data=key)
        if _is_list(field.annotation):
            tree[parts[0]] = [v.strip() for v in value.split(',') if v.strip()]
        else:
            tree[parts[0]] = value
        return
    if section is None:
        raise errors.ConfigError(msg=f'未知配置项: {key}', data=key)
    _assign(tree.setdefault(parts[0], {}), section, parts[1:], value, key)


def build_pipeline_config(values: Mapping[str, str]) -> PipelineConfig:
    """由点号键构建配置"""
    tree: dict[str, Any] = {}
    for key, value in values.items():
        _assign(tree, PipelineConfig, key.split('.'), value, key)
    try:
        return PipelineConfig.model_validate(tree)
    except ValidationError as e:
        first = e.errors()[0]
        field = '.'.join(str(p) for p in first['loc']) or 'pipeline'
        raise errors.ConfigError(msg=f'配置项无效: {field}', data=f'{field}: {first["msg"]}') from e


def load_pipeline_config(path: str | os.PathLike | None = None, overrides: Sequence[str] = ()) -> PipelineConfig:
    """
    读取配置文件并叠加命令行覆盖项

    :param overrides: key=value 形式, 后出现的覆盖文件中的同名键
    """
    values = read_key_value_file(path) if path else {}
    for item in overrides:
        values.update(parse_key_values(item, '--set'))
    return build_pipeline_config(values)
