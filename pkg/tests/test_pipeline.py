import numpy as np
import pytest

from src.common.dataclasses import PredictionRecord
from src.common.enums import AugScheme, ClassifierVariant, FeatureKind, GanMode, Stage
from src.core.exceptions import errors
from src.ensemble import average_vote, write_predictions
from src.ensemble.config import EnsembleConfig
from src.main import main
from src.pipeline import (
    StageMarkers,
    build_pipeline_config,
    build_report,
    format_report,
    load_pipeline_config,
    output_lock,
    run_pipeline,
)
from src.training.metrics import record_accuracy

LABELS = [f's{i}' for i in range(10)]

# 8 kHz、0.5 秒、16 个滤波器: 只验证流程
TINY = {
    'data.duration_s': '0.5',
    'data.sample_rate': '8000',
    'feature.sample_rate': '8000',
    'feature.n_filters': '16',
    'feature.delta_order': '0',
    'feature.min_duration_s': '0.25',
}


def tiny_config(tmp_path, **extra):
    values = {**TINY, 'paths.out': str(tmp_path / 'out'), **extra}
    return build_pipeline_config(values)


class TestPipelineConfig:
    """测试流水线配置"""

    def test_defaults(self):
        config = build_pipeline_config({})
        assert config.scheme == AugScheme.NONE
        assert config.feature.kind == FeatureKind.FBANK
        assert config.system_name == 'fbank-leftright-none-fcnn'

    def test_file_with_sections(self, tmp_path):
        path = tmp_path / 'run.conf'
        path.write_text(
            '# 系统 A\n'
            'scheme=acgan\n'
            'feature.kind=scalogram\n'
            'feature.channel_mode=ave-diff\n'
            'classifier.variant=city_adversary\n'
            'train.seeds=0,1\n'
            'gan.weights.gamma=0.5\n'
            'fusion.members=a,b\n',
            encoding='utf-8',
        )
        config = load_pipeline_config(path)
        assert config.system_name == 'scalogram-avediff-ACGAN-city_adversary'
        assert config.train.seeds == [0, 1]
        assert config.gan.weights.gamma == 0.5
        assert config.fusion.members == ['a', 'b']
        assert config.feature.hop_ms == 175.0

    def test_overrides_win(self, tmp_path):
        path = tmp_path / 'run.conf'
        path.write_text('seed=1\n', encoding='utf-8')
        assert load_pipeline_config(path, ['seed=7']).seed == 7

    def test_gan_mode_follows_scheme(self):
        assert build_pipeline_config({'scheme': 'cvae_acgan'}).gan.mode == GanMode.CVAE
        assert build_pipeline_config({'scheme': 'acgan'}).gan.mode == GanMode.ACGAN

    @pytest.mark.parametrize('key', ['train.max_epoch', 'colour', 'feature.kind.x', 'seed.value'])
    def test_unknown_key(self, key):
        with pytest.raises(errors.ConfigError, match=key.replace('.', r'\.')):
            build_pipeline_config({key: '1'})

    def test_section_needs_field(self):
        with pytest.raises(errors.ConfigError):
            build_pipeline_config({'train': '1'})

    def test_invalid_variant_names_field(self):
        with pytest.raises(errors.ConfigError, match='classifier.variant'):
            build_pipeline_config({'classifier.variant': 'resnet'})

    def test_invalid_value_names_field(self):
        with pytest.raises(errors.ConfigError, match='train.max_epochs'):
            build_pipeline_config({'train.max_epochs': 'many'})

    def test_flat_roundtrip(self):
        config = build_pipeline_config({'scheme': 'acgan', 'classifier.compact': 'true', 'train.seeds': '3,4',
                                        'fusion.members': 'a,b', 'fusion.weights': '0.25,0.75'})
        assert build_pipeline_config(config.flat()) == config

    def test_stage_hash_scopes(self):
        base = build_pipeline_config({})
        changed = build_pipeline_config({'classifier.variant': 'dcnn'})
        assert base.stage_hash(Stage.EXTRACT) == changed.stage_hash(Stage.EXTRACT)
        assert base.stage_hash(Stage.TRAIN) != changed.stage_hash(Stage.TRAIN)
        assert base.stage_hash(Stage.REPORT) != changed.stage_hash(Stage.REPORT)
        jobs = build_pipeline_config({'jobs': '4'})
        assert all(base.stage_hash(s) == jobs.stage_hash(s) for s in Stage)


class TestMarkers:
    """测试完成标记与锁"""

    def test_done_and_failed(self, tmp_path):
        markers = StageMarkers(tmp_path)
        assert not markers.is_done(Stage.EXTRACT, 'h1')
        markers.mark_done(Stage.EXTRACT, 'h1')
        assert markers.is_done(Stage.EXTRACT, 'h1')
        assert not markers.is_done(Stage.EXTRACT, 'h2')
        markers.mark_failed(Stage.EXTRACT, 'h2', RuntimeError('boom'))
        assert markers.is_failed(Stage.EXTRACT)
        assert markers.done_hash(Stage.EXTRACT) is None

    def test_lock_is_exclusive(self, tmp_path):
        with output_lock(tmp_path):
            with pytest.raises(errors.ContractError):
                with output_lock(tmp_path):
                    pass
        with output_lock(tmp_path):
            pass


def records(probs, name):
    return [PredictionRecord(clip_id=f'c{i}', probs=p, classifier_id=name) for i, p in enumerate(probs)]


class TestReport:
    """测试汇总表"""

    @pytest.fixture
    def systems(self, tmp_path):
        rng = np.random.default_rng(2)
        a = records(rng.dirichlet(np.ones(10), 20), 'fbank-leftright-none-fcnn')
        b = records(rng.dirichlet(np.ones(10), 20), 'scalogram-avediff-none-dcnn')
        fused = average_vote([a, b], name='fusion')
        for name, recs in [('fbank-leftright-none-fcnn', a), ('scalogram-avediff-none-dcnn', b), ('fusion', fused)]:
            write_predictions(recs, tmp_path / 'predictions' / f'{name}.csv', LABELS)
        EnsembleConfig(members=[a[0].classifier_id, b[0].classifier_id], name='fusion').write(
            tmp_path / 'fusion' / 'fusion.conf')
        labels = {f'c{i}': int(y) for i, y in enumerate(rng.integers(0, 10, 20))}
        return tmp_path, labels, fused

    def test_three_rows(self, systems):
        root, labels, _ = systems
        rows = build_report(root / 'predictions', labels, root / 'fusion')
        assert [r.kind for r in rows] == ['system', 'system', 'fusion']
        assert all(r.clips == 20 for r in rows)

    def test_fused_accuracy_matches_ensemble(self, systems):
        root, labels, fused = systems
        rows = build_report(root / 'predictions', labels, root / 'fusion')
        assert rows[-1].accuracy == record_accuracy(fused, labels)

    def test_missing_labels(self, systems):
        root, _, _ = systems
        text = format_report(build_report(root / 'predictions', None, root / 'fusion'))
        lines = text.splitlines()
        assert len(lines) == 5
        assert all(line.split()[2] == 'n/a' for line in lines[2:])


class TestRunPipeline:
    """测试阶段执行"""

    def test_data_and_features_idempotent(self, tmp_path):
        config = tiny_config(tmp_path)
        first = run_pipeline(config, [Stage.MKDATA, Stage.EXTRACT])
        assert first.ran == [Stage.MKDATA, Stage.EXTRACT]
        assert len(list((tmp_path / 'out' / 'features').glob('*/*.scnf'))) == 80
        second = run_pipeline(config, [Stage.EXTRACT, Stage.MKDATA])
        assert second.skipped == [Stage.MKDATA, Stage.EXTRACT] and not second.ran
        changed = tiny_config(tmp_path, **{'feature.n_filters': '12'})
        third = run_pipeline(changed, [Stage.MKDATA, Stage.EXTRACT])
        assert third.skipped == [Stage.MKDATA] and third.ran == [Stage.EXTRACT]
        assert (tmp_path / 'out' / 'config.resolved').exists()
        assert not (tmp_path / 'out' / '.lock').exists()

    def test_parallel_extraction_matches(self, tmp_path):
        serial = tiny_config(tmp_path / 'a')
        parallel = tiny_config(tmp_path / 'b', jobs='2')
        run_pipeline(serial, [Stage.MKDATA, Stage.EXTRACT])
        run_pipeline(parallel, [Stage.MKDATA, Stage.EXTRACT])
        a = sorted((tmp_path / 'a' / 'out' / 'features').glob('*/*.scnf'))
        b = sorted((tmp_path / 'b' / 'out' / 'features').glob('*/*.scnf'))
        assert [p.name for p in a] == [p.name for p in b]
        assert all(x.read_bytes() == y.read_bytes() for x, y in zip(a, b))

    def test_failure_marker(self, tmp_path):
        config = tiny_config(tmp_path, **{'paths.manifest': str(tmp_path / 'missing.csv')})
        with pytest.raises(errors.IngestionError):
            run_pipeline(config, [Stage.EXTRACT])
        assert StageMarkers(tmp_path / 'out').is_failed(Stage.EXTRACT)
        assert not (tmp_path / 'out' / '.lock').exists()

    @pytest.mark.slow
    def test_mini_end_to_end(self, tmp_path):
        """两个系统 + 平均融合, 重跑时全部跳过"""
        common = {
            'data.duration_s': '1.0',
            'data.sample_rate': '16000',
            'feature.sample_rate': '16000',
            'feature.n_filters': '32',
            'feature.delta_order': '0',
            'classifier.width': '2',
            'classifier.fc_units': '16',
            'classifier.compact': 'true',
            'train.max_epochs': '40',
            'train.patience': '8',
            'train.batch_size': '16',
            'train.seeds': '0',
            'paths.out': str(tmp_path / 'out'),
        }
        fcnn = build_pipeline_config(common)
        run_pipeline(fcnn)
        predictions = (tmp_path / 'out' / 'predictions' / 'fbank-leftright-none-fcnn.csv').read_text().splitlines()
        assert len(predictions) == 1 + 20

        dcnn = build_pipeline_config({
            **common,
            'classifier.variant': ClassifierVariant.DCNN.value,
            'fusion.members': 'fbank-leftright-none-fcnn,fbank-leftright-none-dcnn',
        })
        run_pipeline(dcnn)
        report = (tmp_path / 'out' / 'report.txt').read_text().splitlines()
        assert len(report) == 2 + 3
        assert all(line.split()[2] != 'n/a' for line in report[2:])

        again = run_pipeline(dcnn)
        assert not again.ran and again.skipped == list(Stage)


class TestMain:
    """测试命令行入口与退出码"""

    def test_invalid_variant_exit_code(self, tmp_path):
        code = main(['extract', '--out', str(tmp_path), '--set', 'classifier.variant=resnet'])
        assert code == 2

    def test_unknown_key_exit_code(self, tmp_path):
        assert main(['extract', '--out', str(tmp_path), '--set', 'train.epochs=3']) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(['extract', '--config', str(tmp_path / 'none.conf')]) == 2

    def test_missing_manifest_exit_code(self, tmp_path):
        code = main(['extract', '--out', str(tmp_path / 'out'), '--set', f'paths.manifest={tmp_path / "m.csv"}'])
        assert code == 3

    def test_mkdata_then_report(self, tmp_path, capsys):
        args = ['--out', str(tmp_path / 'out'), *sum((['--set', f'{k}={v}'] for k, v in TINY.items()), [])]
        assert main(['mkdata', *args]) == 0
        assert (tmp_path / 'out' / 'data' / 'meta.csv').exists()
        assert main(['mkdata', *args]) == 0
        assert main(['report', *args]) == 0
        assert 'system' in capsys.readouterr().out
