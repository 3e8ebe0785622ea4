from __future__ import annotations

from enum import Enum
from enum import IntEnum as SourceIntEnum
from typing import Type


class _EnumBase(Enum):
    @classmethod
    def get_member_keys(cls: Type[Enum]) -> list[str]:
        return [name for name in cls.__members__.keys()]

    @classmethod
    def get_member_values(cls: Type[Enum]) -> list:
        return [item.value for item in cls.__members__.values()]


class IntEnum(_EnumBase, SourceIntEnum):
    """整型枚举"""


class StrEnum(_EnumBase, str, Enum):
    """字符串枚举"""


class Mode(StrEnum):
    """网络运行模式"""

    TRAIN = "train"
    EVAL = "eval"


class FeatureKind(StrEnum):
    """特征类型"""

    FBANK = "fbank"
    SCALOGRAM = "scalogram"


class ChannelMode(StrEnum):
    """双声道编码方式"""

    LEFT_RIGHT = "left-right"
    AVE_DIFF = "ave-diff"


class FilterKind(StrEnum):
    """滤波器组类型"""

    MEL = "mel"
    WAVELET = "wavelet"


class Provenance(StrEnum):
    """样本来源"""

    REAL = "real"
    GENERATED = "generated"


class Fold(StrEnum):
    """官方 fold 划分"""

    TRAIN = "train"
    EVALUATE = "evaluate"


class ClassifierVariant(StrEnum):
    """分类器变体"""

    FCNN = "fcnn"
    DCNN = "dcnn"
    DCNN_DCT = "dcnn_dct"
    CITY_ADVERSARY = "city_adversary"
    CITY_ADVERSARY_DCT = "city_adversary_dct"
    INCEPLSTM = "inceplstm"
    INCEPGRU_V1 = "incepgru_v1"
    INCEPGRU_V2 = "incepgru_v2"
    INCEPGRU_V3 = "incepgru_v3"


class HybridVariant(StrEnum):
    """Inception/循环混合网络"""

    INCEP_LSTM = "IncepLSTM"
    INCEP_GRU_V1 = "IncepGRUV1"
    INCEP_GRU_V2 = "IncepGRUV2"
    INCEP_GRU_V3 = "IncepGRUV3"


class InceptionKind(StrEnum):
    """Inception 模块类型"""

    I = "I"  # noqa: E741
    II = "II"


class RecurrentKind(StrEnum):
    """循环单元类型"""

    LSTM = "LSTM"
    GRU = "GRU"


class AugScheme(StrEnum):
    """数据增强方案"""

    NONE = "none"
    ACGAN = "acgan"
    CVAE_ACGAN = "cvae_acgan"


class GanMode(StrEnum):
    """GAN 训练模式"""

    ACGAN = "ACGAN"
    CVAE = "CVAE"


class RoundDecision(StrEnum):
    """增强轮次结论"""

    ACCEPTED = "accepted"
    REJECTED = "rejected"


class RoundStatus(StrEnum):
    """增强轮次状态"""

    PENDING = "pending"
    COMPLETED = "completed"


class VoteMethod(StrEnum):
    """融合方式"""

    AVERAGE = "average"
    WEIGHTED = "weighted"


class Stage(StrEnum):
    """流水线阶段"""

    MKDATA = "mkdata"
    EXTRACT = "extract"
    AUGMENT = "augment"
    TRAIN = "train"
    PREDICT = "predict"
    FUSE = "fuse"
    EVAL = "eval"
    REPORT = "report"
