import numpy as np
import pytest

from src.common.dataclasses import PredictionRecord
from src.common.enums import VoteMethod
from src.core.exceptions import errors
from src.ensemble import (
    EnsembleConfig,
    average_vote,
    fit_weights,
    read_predictions,
    weighted_vote,
    write_predictions,
)
from src.utils.key_value import parse_key_values

LABELS = [f's{i}' for i in range(10)]


@pytest.fixture
def rng():
    return np.random.default_rng(5)


def member(probs, name='m', ids=None):
    ids = ids or [f'clip{i}' for i in range(len(probs))]
    return [PredictionRecord(clip_id=c, probs=np.asarray(p, dtype=np.float64), classifier_id=name)
            for c, p in zip(ids, probs)]


def random_member(rng, clips=12, classes=10, name='m'):
    return member(rng.dirichlet(np.ones(classes), size=clips), name)


def probs_of(records):
    return np.stack([r.probs for r in records])


class TestAverageVote:
    """测试平均投票"""

    def test_identical_members(self, rng):
        m = random_member(rng)
        fused = average_vote([m, m, m])
        np.testing.assert_allclose(probs_of(fused), probs_of(m), rtol=0, atol=1e-15)
        assert [r.label for r in fused] == [r.label for r in m]

    def test_tie_goes_to_lowest_class(self):
        fused = average_vote([member([[1.0, 0.0]]), member([[0.0, 1.0]])])
        np.testing.assert_array_equal(fused[0].probs, [0.5, 0.5])
        assert fused[0].label == 0

    def test_matches_scalar_loop(self, rng):
        members = [random_member(rng, name=str(k)) for k in range(4)]
        fused = average_vote(members)
        for i, record in enumerate(fused):
            for c in range(10):
                expected = sum(m[i].probs[c] for m in members) / 4
                assert record.probs[c] == pytest.approx(expected, abs=1e-9)

    def test_aligns_by_clip_id(self, rng):
        m = random_member(rng, clips=5)
        shuffled = [m[i] for i in [3, 0, 4, 1, 2]]
        fused = average_vote([m, shuffled])
        np.testing.assert_allclose(probs_of(fused), probs_of(m), atol=1e-15)

    def test_clip_mismatch(self, rng):
        a = random_member(rng, clips=4)
        b = member(probs_of(a), ids=['clip0', 'clip1', 'clip2', 'other'])
        with pytest.raises(errors.AlignmentError):
            average_vote([a, b])

    def test_valid_distributions(self, rng):
        fused = average_vote([random_member(rng) for _ in range(3)])
        probs = probs_of(fused)
        assert np.all(probs >= 0)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)


class TestWeightedVote:
    """测试加权投票"""

    def test_uniform_equals_average_bitwise(self, rng):
        members = [random_member(rng) for _ in range(7)]
        for value in [1.0, 1.0 / 7, 3.3]:
            weighted = probs_of(weighted_vote(members, [value] * 7))
            np.testing.assert_array_equal(weighted, probs_of(average_vote(members)))

    def test_one_hot_selects_member(self, rng):
        members = [random_member(rng) for _ in range(3)]
        fused = weighted_vote(members, [0.0, 2.0, 0.0])
        np.testing.assert_array_equal(probs_of(fused), probs_of(members[1]))

    def test_matches_scalar_loop(self, rng):
        members = [random_member(rng) for _ in range(3)]
        weights = rng.uniform(0.1, 1.0, 3)
        fused = weighted_vote(members, weights)
        for i, record in enumerate(fused):
            for c in range(10):
                expected = sum(w * m[i].probs[c] for w, m in zip(weights, members)) / weights.sum()
                assert record.probs[c] == pytest.approx(expected, abs=1e-9)

    def test_scale_invariance(self, rng):
        members = [random_member(rng) for _ in range(3)]
        weights = np.array([0.2, 0.5, 0.3])
        first = [r.label for r in weighted_vote(members, weights)]
        second = [r.label for r in weighted_vote(members, weights * 17.0)]
        assert first == second

    def test_weight_count_mismatch(self, rng):
        with pytest.raises(errors.ConfigError):
            weighted_vote([random_member(rng), random_member(rng)], [1.0])

    def test_negative_weight(self, rng):
        with pytest.raises(errors.ConfigError):
            weighted_vote([random_member(rng), random_member(rng)], [1.0, -0.5])


def holdout(rng, clips=40, classes=10):
    labels = rng.integers(0, classes, clips)
    return labels, {f'clip{i}': int(y) for i, y in enumerate(labels)}


def noisy_member(rng, labels, hit_rate, classes=10):
    """以 hit_rate 的概率把最大概率放在正确类别上"""
    probs = rng.dirichlet(np.ones(classes), size=len(labels))
    for i, y in enumerate(labels):
        target = y if rng.random() < hit_rate else (y + 1 + rng.integers(classes - 1)) % classes
        probs[i, target] += 1.0
    return member(probs / probs.sum(axis=1, keepdims=True))


def accuracy(records, label_map):
    return np.mean([r.label == label_map[r.clip_id] for r in records])


class TestFitWeights:
    """测试权重拟合"""

    def test_dominant_member(self, rng):
        labels, label_map = holdout(rng)
        right = member(np.eye(10)[labels])
        wrong = member(np.eye(10)[(labels + 1) % 10])
        weights = fit_weights([wrong, right, wrong], label_map)
        assert weights[1] >= weights.max()
        assert accuracy(weighted_vote([wrong, right, wrong], weights), label_map) == 1.0

    def test_identical_members_get_uniform(self, rng):
        labels, label_map = holdout(rng)
        m = noisy_member(rng, labels, 0.6)
        weights = fit_weights([m, m, m], label_map)
        np.testing.assert_allclose(weights, np.full(3, 1.0 / 3))

    @pytest.mark.parametrize('trial', range(10))
    def test_never_below_best_member(self, trial):
        rng = np.random.default_rng(100 + trial)
        labels, label_map = holdout(rng)
        members = [noisy_member(rng, labels, rate) for rate in rng.uniform(0.2, 0.8, 3)]
        weights = fit_weights(members, label_map)
        assert weights.sum() == pytest.approx(1.0)
        assert np.all(weights >= 0)
        fused = accuracy(weighted_vote(members, weights), label_map)
        assert fused >= max(accuracy(m, label_map) for m in members)

    def test_deterministic(self, rng):
        labels, label_map = holdout(rng)
        members = [noisy_member(rng, labels, 0.5) for _ in range(3)]
        np.testing.assert_array_equal(fit_weights(members, label_map), fit_weights(members, label_map))

    def test_single_class_holdout(self, rng):
        labels = np.zeros(10, dtype=int)
        label_map = {f'clip{i}': 0 for i in range(10)}
        members = [noisy_member(rng, labels, 0.5) for _ in range(2)]
        np.testing.assert_array_equal(fit_weights(members, label_map), [0.5, 0.5])

    def test_needs_two_members(self, rng):
        labels, label_map = holdout(rng)
        with pytest.raises(errors.ConfigError):
            fit_weights([noisy_member(rng, labels, 0.5)], label_map)

    def test_missing_labels(self, rng):
        labels, label_map = holdout(rng)
        members = [noisy_member(rng, labels, 0.5) for _ in range(2)]
        del label_map['clip0']
        with pytest.raises(errors.AlignmentError):
            fit_weights(members, label_map)


class TestPredictionFile:
    """测试预测文件"""

    def test_roundtrip_bit_exact(self, rng, tmp_path):
        records = random_member(rng, name='fbank-leftright-none-fcnn')
        path = tmp_path / 'fbank-leftright-none-fcnn.csv'
        write_predictions(records, path, LABELS)
        restored = read_predictions(path, label_set=LABELS)
        assert [r.clip_id for r in restored] == [r.clip_id for r in records]
        np.testing.assert_array_equal(probs_of(restored), probs_of(records))
        assert restored[0].classifier_id == 'fbank-leftright-none-fcnn'

    def test_header(self, rng, tmp_path):
        write_predictions(random_member(rng, clips=1), tmp_path / 'p.csv', LABELS)
        assert (tmp_path / 'p.csv').read_text().splitlines()[0] == 'clip_id,' + ','.join(LABELS)

    def test_bad_row(self, tmp_path):
        path = tmp_path / 'p.csv'
        path.write_text('clip_id,a,b\nx,0.5\n', encoding='utf-8')
        with pytest.raises(errors.CorruptionError):
            read_predictions(path)

    def test_non_numeric(self, tmp_path):
        path = tmp_path / 'p.csv'
        path.write_text('clip_id,a,b\nx,0.5,abc\n', encoding='utf-8')
        with pytest.raises(errors.CorruptionError):
            read_predictions(path)

    def test_label_set_mismatch(self, rng, tmp_path):
        write_predictions(random_member(rng, clips=2), tmp_path / 'p.csv', LABELS)
        with pytest.raises(errors.AlignmentError):
            read_predictions(tmp_path / 'p.csv', label_set=list(reversed(LABELS)))

    def test_missing_file(self, tmp_path):
        with pytest.raises(errors.IngestionError):
            read_predictions(tmp_path / 'none.csv')


class TestEnsembleConfig:
    """测试融合配置文件"""

    def test_file_roundtrip(self, tmp_path):
        config = EnsembleConfig(members=['a', 'b'], method=VoteMethod.WEIGHTED, weights=[0.25, 0.75], name='sys-b')
        config.write(tmp_path / 'fusion.conf')
        assert EnsembleConfig.from_file(tmp_path / 'fusion.conf') == config

    def test_comments_and_defaults(self, tmp_path):
        path = tmp_path / 'fusion.conf'
        path.write_text('# 两个系统\nmembers = a, b\n', encoding='utf-8')
        config = EnsembleConfig.from_file(path)
        assert config.members == ['a', 'b'] and config.method == VoteMethod.AVERAGE

    @pytest.mark.parametrize('text', [
        'members=a,b\nweights=1.0\n',
        'members=a,b\nweights=1.0,-1.0\n',
        'members=a,b\nmethod=median\n',
        'method=average\n',
    ])
    def test_invalid(self, tmp_path, text):
        path = tmp_path / 'fusion.conf'
        path.write_text(text, encoding='utf-8')
        with pytest.raises(errors.ConfigError):
            EnsembleConfig.from_file(path)

    def test_key_value_errors(self):
        with pytest.raises(errors.ConfigError):
            parse_key_values('a=1\na=2\n')
        with pytest.raises(errors.ConfigError):
            parse_key_values('just a line\n')
        assert parse_key_values('train.lr = 0.01  # 注释\n') == {'train.lr': '0.01'}
