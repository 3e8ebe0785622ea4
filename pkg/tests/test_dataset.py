import numpy as np
import pytest

from src.common.dataclasses import FeatureMap
from src.common.enums import ChannelMode, FeatureKind, Fold
from src.core.exceptions import errors
from src.dataset import (
    MINI_CITIES,
    cache_roundtrip,
    city_of,
    load_or_extract,
    make_mini_dataset,
    parse_manifest,
    read_wav,
    write_manifest,
    write_wav,
)
from src.features import FeatureConfig, encode_feature, read_feature_cache, write_feature_cache


@pytest.fixture
def rng():
    return np.random.default_rng(11)


def feature_map(rng, shape=(58, 2, 290), **metadata):
    return FeatureMap(
        data=rng.normal(size=shape).astype(np.float32),
        hop_ms=175.0,
        win_ms=555.0,
        channel_mode=ChannelMode.AVE_DIFF,
        feature_kind=FeatureKind.SCALOGRAM,
        metadata=metadata,
    )


class TestManifest:
    """测试清单解析"""

    def test_single_row(self, tmp_path):
        path = tmp_path / 'meta.csv'
        path.write_text('audio/airport-barcelona-0-a.wav\tairport\n', encoding='utf-8')
        manifest = parse_manifest(path)
        clip = manifest.clips[0]
        assert (clip.id, clip.scene, clip.city, clip.fold) == ('airport-barcelona-0-a', 'airport', 'barcelona',
                                                               Fold.TRAIN)
        assert clip.path.endswith('audio/airport-barcelona-0-a.wav')

    def test_header_and_folds(self, tmp_path):
        path = tmp_path / 'meta.csv'
        path.write_text(
            'filename\tscene_label\tfold\n'
            'audio/bus-lisbon-0-a.wav\tbus\ttrain\n'
            'audio/bus-lisbon-1-a.wav\tbus\tevaluate\n',
            encoding='utf-8',
        )
        manifest = parse_manifest(path)
        assert [c.id for c in manifest.fold(Fold.TRAIN)] == ['bus-lisbon-0-a']
        assert [c.id for c in manifest.fold(Fold.EVALUATE)] == ['bus-lisbon-1-a']
        assert not manifest.diagnostics

    def test_malformed_row_is_collected(self, tmp_path):
        rows = [f'audio/park-london-{i}-a.wav\tpark' for i in range(9)] + ['audio/park-london-9-a.wav']
        path = tmp_path / 'meta.csv'
        path.write_text('\n'.join(rows), encoding='utf-8')
        manifest = parse_manifest(path)
        assert len(manifest.clips) == 9
        assert len(manifest.diagnostics) == 1
        assert manifest.diagnostics[0].startswith('10:')

    @pytest.mark.parametrize('row', [
        'audio/park.wav\tpark',
        'audio/park-london-0-a.wav\tbeach',
        'audio/park-london-0-a.wav\tpark\tfold9',
    ])
    def test_invalid_rows(self, tmp_path, row):
        path = tmp_path / 'meta.csv'
        path.write_text(f'audio/tram-london-0-a.wav\ttram\n{row}\n', encoding='utf-8')
        manifest = parse_manifest(path)
        assert len(manifest.clips) == 1 and len(manifest.diagnostics) == 1

    def test_duplicate_clip(self, tmp_path):
        path = tmp_path / 'meta.csv'
        path.write_text('a/tram-london-0-a.wav\ttram\nb/tram-london-0-a.wav\ttram\n', encoding='utf-8')
        assert len(parse_manifest(path).diagnostics) == 1

    def test_empty_file(self, tmp_path):
        path = tmp_path / 'meta.csv'
        path.write_text('', encoding='utf-8')
        with pytest.raises(errors.IngestionError):
            parse_manifest(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(errors.IngestionError):
            parse_manifest(tmp_path / 'nope.csv')

    def test_city_of(self):
        assert city_of('audio/street_traffic-stockholm-103-3100-a.wav') == 'stockholm'
        with pytest.raises(ValueError):
            city_of('audio/nocity.wav')

    def test_write_parse_roundtrip(self, tmp_path):
        path = tmp_path / 'meta.csv'
        path.write_text('audio/bus-lisbon-0-a.wav\tbus\nx/metro-paris-2-a.wav\tmetro\tevaluate\n', encoding='utf-8')
        manifest = parse_manifest(path)
        write_manifest(manifest, tmp_path / 'copy.csv')
        again = parse_manifest(tmp_path / 'copy.csv')
        assert [(c.id, c.scene, c.city, c.fold) for c in again.clips] == \
            [(c.id, c.scene, c.city, c.fold) for c in manifest.clips]


class TestAudio:
    """测试 WAV 读写"""

    def test_roundtrip_pcm16(self, rng, tmp_path):
        samples = rng.uniform(-0.5, 0.5, size=(1600, 2))
        write_wav(tmp_path / 'x.wav', samples, 16000)
        restored, sample_rate = read_wav(tmp_path / 'x.wav')
        assert sample_rate == 16000
        assert restored.shape == (1600, 2)
        np.testing.assert_allclose(restored, samples, atol=1.0 / 32768)

    def test_pcm24(self, rng, tmp_path):
        samples = rng.uniform(-0.5, 0.5, size=(800, 1))
        write_wav(tmp_path / 'x.wav', samples, 8000, subtype='PCM_24')
        restored, _ = read_wav(tmp_path / 'x.wav')
        np.testing.assert_allclose(restored, samples, atol=1.0 / 2 ** 23)

    def test_unreadable(self, tmp_path):
        (tmp_path / 'bad.wav').write_bytes(b'not a wav file')
        with pytest.raises(errors.IngestionError):
            read_wav(tmp_path / 'bad.wav')

    def test_float_subtype_rejected(self, rng, tmp_path):
        with pytest.raises(errors.ConfigError):
            write_wav(tmp_path / 'x.wav', rng.normal(size=(10, 1)), 8000, subtype='FLOAT')


class TestFeatureCache:
    """测试 SCNF1 特征缓存"""

    def test_roundtrip_bit_exact(self, rng, tmp_path):
        feature = feature_map(rng, provenance='generated', epoch='30', scene='bus')
        restored = cache_roundtrip(feature, tmp_path / 'f.scnf')
        assert restored.shape == (58, 2, 290)
        np.testing.assert_array_equal(restored.data, feature.data)
        assert list(restored.metadata.items()) == [('provenance', 'generated'), ('epoch', '30'), ('scene', 'bus')]
        assert (restored.hop_ms, restored.win_ms) == (175.0, 555.0)
        assert restored.channel_mode == ChannelMode.AVE_DIFF
        assert restored.feature_kind == FeatureKind.SCALOGRAM

    def test_layout(self, rng):
        payload = encode_feature(feature_map(rng, shape=(3, 2, 4)))
        assert payload[:5] == b'SCNF1'
        assert np.frombuffer(payload[5:17], dtype='<u4').tolist() == [3, 2, 4]

    @pytest.mark.parametrize('cut', [3, 40, 1])
    def test_truncated(self, rng, tmp_path, cut):
        path = tmp_path / 'f.scnf'
        write_feature_cache(feature_map(rng, shape=(4, 2, 8), scene='park'), path)
        payload = path.read_bytes()
        path.write_bytes(payload[:-cut] if cut > 1 else payload[:cut])
        with pytest.raises(errors.CorruptionError):
            read_feature_cache(path)

    def test_bad_magic(self, rng, tmp_path):
        path = tmp_path / 'f.scnf'
        path.write_bytes(b'XXXXX' + encode_feature(feature_map(rng, shape=(2, 2, 2)))[5:])
        with pytest.raises(errors.CorruptionError):
            read_feature_cache(path)

    def test_trailing_bytes(self, rng, tmp_path):
        path = tmp_path / 'f.scnf'
        path.write_bytes(encode_feature(feature_map(rng, shape=(2, 2, 2))) + b'\0')
        with pytest.raises(errors.CorruptionError):
            read_feature_cache(path)

    def test_invalid_metadata_key(self, rng, tmp_path):
        with pytest.raises(errors.InputError):
            write_feature_cache(feature_map(rng, shape=(2, 2, 2), **{'a=b': 'c'}), tmp_path / 'f.scnf')


class TestMiniDataset:
    """测试合成数据集 (缩短时长与采样率)"""

    @pytest.fixture
    def small(self):
        return dict(duration_s=0.25, sample_rate=16000)

    def test_default_counts(self, tmp_path, small):
        manifest = make_mini_dataset(tmp_path, np.random.default_rng(0), **small)
        assert len(manifest.clips) == 80
        scenes = [c.scene for c in manifest.clips]
        assert all(scenes.count(s) == 8 for s in manifest.label_set)
        for scene in manifest.label_set:
            cities = [c.city for c in manifest.clips if c.scene == scene]
            assert all(cities.count(city) == 2 for city in MINI_CITIES)
        assert len(manifest.fold(Fold.EVALUATE)) == 20
        assert len(manifest.fold(Fold.TRAIN)) == 60

    def test_manifest_written(self, tmp_path, small):
        make_mini_dataset(tmp_path, np.random.default_rng(0), **small)
        parsed = parse_manifest(tmp_path / 'meta.csv')
        assert len(parsed.clips) == 80 and not parsed.diagnostics
        assert (tmp_path / 'audio' / 'airport-barcelona-0-a.wav').exists()
        samples, sample_rate = read_wav(parsed.clips[0].path)
        assert samples.shape == (4000, 2) and sample_rate == 16000

    def test_deterministic(self, tmp_path, small):
        make_mini_dataset(tmp_path / 'a', np.random.default_rng(5), **small)
        make_mini_dataset(tmp_path / 'b', np.random.default_rng(5), **small)
        for name in ['bus-lisbon-1-a.wav', 'tram-london-0-a.wav']:
            assert (tmp_path / 'a' / 'audio' / name).read_bytes() == (tmp_path / 'b' / 'audio' / name).read_bytes()

    def test_load_or_extract_caches(self, tmp_path):
        manifest = make_mini_dataset(tmp_path / 'data', np.random.default_rng(0), duration_s=1.0, sample_rate=16000)
        clip = manifest.clips[0]
        config = FeatureConfig(kind=FeatureKind.FBANK, sample_rate=16000, n_filters=16)
        first = load_or_extract(clip, config, tmp_path / 'cache')
        assert (tmp_path / 'cache' / f'{clip.id}.scnf').exists()
        second = load_or_extract(clip, config, tmp_path / 'cache')
        np.testing.assert_array_equal(first.data, second.data)
        assert second.metadata['scene'] == clip.scene and second.metadata['city'] == clip.city
