import math

import numpy as np
import pytest

from src.common.dataclasses import FeatureMap
from src.common.enums import ChannelMode, FeatureKind
from src.core.exceptions import errors
from src.features import (
    FeatureConfig,
    channel_transform,
    delta,
    deltas,
    extract_fbank,
    extract_scalogram,
    frame_count,
    inverse_channel_transform,
    mel_filterbank,
    stft,
    wavelet_filterbank,
)
from src.features.filterbank import wavelet_centers

SR = 48000


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture(scope='module')
def noise_clip():
    """10 秒双声道白噪声, 按 16 bit 量化"""
    samples = np.random.default_rng(0).uniform(-0.5, 0.5, (10 * SR, 2))
    return np.round(samples * 32768) / 32768


def feature_map(data):
    return FeatureMap(
        data=data, hop_ms=20.0, win_ms=40.0, channel_mode=ChannelMode.LEFT_RIGHT, feature_kind=FeatureKind.FBANK
    )


class TestStft:
    """测试短时傅里叶变换"""

    def test_zero_signal(self):
        """零信号 -> 全零幅度"""
        assert np.all(stft(np.zeros(4000), win=400, hop=160) == 0.0)

    def test_bin_centered_sine(self):
        """频点中心上的正弦: 主峰比相隔两个频点处高 20 dB 以上"""
        sr, win, k = 16000, 1024, 100
        t = np.arange(sr) / sr
        spec = stft(np.sin(2 * np.pi * k * sr / win * t), win=win, hop=512)
        frame = spec[spec.shape[0] // 2]
        assert int(np.argmax(frame)) == k
        assert 20 * np.log10(frame[k] / frame[k - 2]) >= 20
        assert 20 * np.log10(frame[k] / frame[k + 2]) >= 20

    def test_ten_second_fbank_frames(self):
        """10 秒 48 kHz, 帧移 20 ms -> 500 帧, 频点 nfft/2 + 1"""
        spec = stft(np.zeros(10 * SR), win=1920, hop=960)
        assert spec.shape == (500, 1025)

    def test_frame_count_formula(self, rng):
        """100 组随机 (win, hop, len) 与独立的帧数计算一致"""
        for _ in range(100):
            hop = int(rng.integers(1, 200))
            win = int(rng.integers(hop, 4 * hop + 1))
            length = int(rng.integers(1, 5000))
            assert stft(rng.standard_normal(length), win=win, hop=hop).shape[0] == math.ceil(length / hop)
            assert frame_count(length, hop) == -(-length // hop)

    def test_empty_signal(self):
        """空信号报输入错误"""
        with pytest.raises(errors.InputError):
            stft(np.zeros(0), win=4, hop=2)


class TestFilterBanks:
    """测试滤波器组"""

    def test_mel_rows_and_centers(self):
        """128 行, 中心严格递增, 峰值为 1"""
        bank = mel_filterbank(128, 2048, SR)
        assert bank.weights.shape == (128, 1025)
        assert np.all(np.diff(bank.centers) > 0)
        np.testing.assert_allclose(bank.weights.max(axis=1), 1.0)
        assert np.all(bank.weights >= 0)

    def test_mel_coverage(self):
        """(0, Nyquist) 内每个频点都被至少一个滤波器覆盖"""
        bank = mel_filterbank(40, 512, 16000)
        assert np.all(bank.weights[:, 1:-1].sum(axis=0) > 0)

    def test_mel_too_many_filters(self):
        """滤波器数量超过频点数报配置错误"""
        with pytest.raises(errors.ConfigError):
            mel_filterbank(64, 64, 16000)

    def test_wavelet_rows(self):
        """290 行, 中心严格递增且不超过 Nyquist, 每行非负正和"""
        bank = wavelet_filterbank(290, 32768, SR)
        assert bank.weights.shape == (290, 16385)
        assert np.all(np.diff(bank.centers) > 0)
        assert bank.centers[-1] <= SR / 2
        assert np.all(bank.weights >= 0) and np.all(bank.weights.sum(axis=1) > 0)

    def test_wavelet_spacing(self):
        """低频段等差, 高频段等比"""
        centers, n_lin = wavelet_centers(290, SR / 2, 20.0)
        assert 1 < n_lin < 290
        linear = np.diff(centers[:n_lin])
        np.testing.assert_allclose(linear, linear[0], atol=1e-9)
        ratios = centers[n_lin:][1:] / centers[n_lin:][:-1]
        np.testing.assert_allclose(ratios, ratios[0], atol=1e-9)
        # 衔接处间隔连续
        assert math.isclose(centers[n_lin] - centers[n_lin - 1], 20.0, rel_tol=1e-9)

    def test_wavelet_small_band(self):
        """线性间隔放不下时整体退化为等差"""
        centers, n_lin = wavelet_centers(50, 400.0, 20.0)
        assert n_lin == 50
        assert centers[-1] <= 400.0


class TestTransforms:
    """测试声道编码与 delta"""

    def test_identical_channels(self, rng):
        """L == R -> diff 全零"""
        left = rng.standard_normal(100)
        encoded = channel_transform(np.stack([left, left], axis=1), ChannelMode.AVE_DIFF)
        np.testing.assert_array_equal(encoded[:, 1], 0.0)

    def test_hand_values(self):
        """L=[2], R=[0] -> ave [1], diff [1]"""
        encoded = channel_transform(np.array([[2.0, 0.0]]), ChannelMode.AVE_DIFF)
        np.testing.assert_array_equal(encoded, [[1.0, 1.0]])

    def test_exact_inverse(self, noise_clip):
        """量化音频上的 ave-diff 逆变换逐位还原"""
        encoded = channel_transform(noise_clip, ChannelMode.AVE_DIFF)
        np.testing.assert_array_equal(inverse_channel_transform(encoded, ChannelMode.AVE_DIFF), noise_clip)

    def test_feature_map_mode(self, rng):
        """特征图上的编码更新 channel_mode"""
        encoded = channel_transform(feature_map(rng.standard_normal((5, 2, 3))), ChannelMode.AVE_DIFF)
        assert encoded.channel_mode == ChannelMode.AVE_DIFF

    def test_mono_input(self):
        """单声道做 ave-diff 报输入错误"""
        with pytest.raises(errors.InputError):
            channel_transform(np.zeros((10, 1)), ChannelMode.AVE_DIFF)

    def test_constant_deltas(self):
        """常数特征的 delta 全零"""
        stacked = deltas(feature_map(np.full((10, 2, 4), 3.0)), order=2)
        np.testing.assert_allclose(stacked.data[:, 2:], 0.0, atol=1e-6)

    def test_ramp_delta(self):
        """线性斜坡的一阶 delta 等于斜率 (边界外)"""
        ramp = np.tile((0.5 * np.arange(20)).reshape(20, 1, 1), (1, 1, 3))
        stacked = deltas(feature_map(ramp), order=1)
        np.testing.assert_allclose(stacked.data[2:-2, 1], 0.5, rtol=1e-6)

    def test_delta_matches_regression_formula(self, rng):
        """与逐帧回归公式一致, 边界按首尾帧复制"""
        data = rng.standard_normal((12, 2, 5))
        padded = np.concatenate([np.repeat(data[:1], 2, axis=0), data, np.repeat(data[-1:], 2, axis=0)])
        expected = sum(k * (padded[2 + k: 14 + k] - padded[2 - k: 14 - k]) for k in (1, 2)) / 10.0
        np.testing.assert_allclose(delta(data, width=2), expected, atol=1e-10)

    def test_stacked_shape(self, rng):
        """500×2×128 -> 500×6×128"""
        stacked = deltas(feature_map(rng.standard_normal((500, 2, 128)).astype(np.float32)), order=2)
        assert stacked.shape == (500, 6, 128)
        assert stacked.metadata['delta_order'] == '2'

    def test_too_few_frames(self):
        """帧数不足报输入错误"""
        with pytest.raises(errors.InputError):
            deltas(feature_map(np.zeros((4, 2, 3))), order=1)


class TestExtract:
    """测试特征提取"""

    def test_fbank_shapes(self, noise_clip):
        """10 秒双声道: delta 前 500×2×128, 默认 500×6×128"""
        pre = extract_fbank(noise_clip, SR, FeatureConfig(kind=FeatureKind.FBANK, delta_order=0))
        assert pre.shape == (500, 2, 128)
        assert extract_fbank(noise_clip, SR).shape == (500, 6, 128)

    def test_fbank_silence(self):
        """静音 -> 每帧等于 log(floor)"""
        config = FeatureConfig(kind=FeatureKind.FBANK, delta_order=0)
        out = extract_fbank(np.zeros((10 * SR, 2)), SR, config)
        np.testing.assert_allclose(out.data, np.log(config.log_floor), rtol=1e-6)

    def test_tone_concentrates_energy(self, noise_clip):
        """窄带音调的最大频带能量占比是白噪声的 3 倍以上"""
        config = FeatureConfig(kind=FeatureKind.FBANK, delta_order=0)
        t = np.arange(2 * SR) / SR
        tone = np.stack([np.sin(2 * np.pi * 1000 * t)] * 2, axis=1)

        def max_band_share(samples):
            energy = np.exp(extract_fbank(samples, SR, config).data[:, 0]).mean(axis=0)
            return energy.max() / energy.sum()

        assert max_band_share(tone) >= 3 * max_band_share(noise_clip[: 2 * SR])

    def test_scalogram_shape(self, noise_clip):
        """10 秒双声道默认分帧 -> 58×2×290"""
        assert extract_scalogram(noise_clip, SR).shape == (58, 2, 290)

    def test_scalogram_silence(self):
        """静音 -> 常数 log(floor)"""
        out = extract_scalogram(np.zeros((2 * SR, 2)), SR)
        np.testing.assert_allclose(out.data, np.log(1e-10), rtol=1e-6)

    def test_swap_channels(self, noise_clip):
        """交换左右声道 -> 通道平面交换"""
        clip = noise_clip[: 2 * SR]
        out = extract_scalogram(clip, SR)
        swapped = extract_scalogram(clip[:, ::-1], SR)
        np.testing.assert_array_equal(swapped.data[:, 0], out.data[:, 1])
        np.testing.assert_array_equal(swapped.data[:, 1], out.data[:, 0])

    def test_deterministic(self, noise_clip):
        """同一输入同一配置逐位相同"""
        clip = noise_clip[: 2 * SR]
        config = FeatureConfig(kind=FeatureKind.FBANK, channel_mode=ChannelMode.AVE_DIFF)
        np.testing.assert_array_equal(extract_fbank(clip, SR, config).data, extract_fbank(clip, SR, config).data)

    def test_resample(self, noise_clip):
        """采样率不一致时重采样到配置采样率"""
        config = FeatureConfig(kind=FeatureKind.FBANK, sample_rate=16000, delta_order=0)
        out = extract_fbank(noise_clip[: 2 * SR], SR, config)
        assert out.shape == (100, 2, 128)

    def test_corrupt_audio(self):
        """非有限值音频报读取错误"""
        samples = np.zeros((SR, 2))
        samples[10, 0] = np.nan
        with pytest.raises(errors.IngestionError):
            extract_fbank(samples, SR)

    def test_too_short(self):
        """短于最短时长报输入错误"""
        with pytest.raises(errors.InputError):
            extract_fbank(np.zeros((SR // 2, 2)), SR)

    def test_config_validation(self):
        """win < hop 的配置非法"""
        with pytest.raises(ValueError):
            FeatureConfig(kind=FeatureKind.FBANK, win_ms=10.0, hop_ms=20.0)
