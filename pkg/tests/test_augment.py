import itertools

import numpy as np
import pytest

from src.augment import (
    AugmentationRound,
    AugmentConfig,
    AugmentedDatabase,
    append_record,
    apply_decision,
    city_split,
    gan_candidates,
    partition_cities,
    read_ledger,
    run_round,
    run_rounds,
)
from src.augment import protocol
from src.common.dataclasses import FeatureMap
from src.common.enums import ChannelMode, FeatureKind, RoundDecision, RoundStatus
from src.core.exceptions import errors
from src.features import read_feature_cache
from src.gan import GanConfig, GanTriple, train_gan
from src.models import build_dcnn
from src.training import LabeledFeatures, TrainConfig

LABELS = ('park', 'tram')


@pytest.fixture
def rng():
    return np.random.default_rng(21)


def city_set(rng, per_pair=3, cities=4, frames=2, filters=16):
    """2 个场景 × cities 个城市, 场景间均值相差 3"""
    labels, city_ids = [], []
    for scene, city in itertools.product(range(len(LABELS)), range(cities)):
        labels += [scene] * per_pair
        city_ids += [city] * per_pair
    labels = np.asarray(labels)
    features = rng.normal(size=(len(labels), frames, 1, filters)) + 3.0 * labels[:, None, None, None]
    ids = [f'{LABELS[s]}-c{c}-{i}' for i, (s, c) in enumerate(zip(labels, city_ids))]
    return LabeledFeatures(features=features, labels=labels, clip_ids=ids, cities=np.asarray(city_ids))


def oracle_candidates(sub_train, count_per_class, scenes, rng):
    """从真实类均值附近采样的候选"""
    maps = []
    for scene in scenes:
        mean = 3.0 * LABELS.index(scene)
        for _ in range(count_per_class):
            maps.append(FeatureMap(
                data=(rng.normal(size=sub_train.features.shape[1:]) + mean).astype(np.float32),
                hop_ms=20.0,
                win_ms=40.0,
                channel_mode=ChannelMode.LEFT_RIGHT,
                feature_kind=FeatureKind.FBANK,
                metadata={'provenance': 'generated', 'scene': scene},
            ))
    return maps


def real_template(shape=(4, 1, 16)):
    """scalogram + ave-diff 的真实特征图, 带片段级 metadata"""
    return FeatureMap(
        data=np.zeros(shape, dtype=np.float32),
        hop_ms=175.0,
        win_ms=555.0,
        channel_mode=ChannelMode.AVE_DIFF,
        feature_kind=FeatureKind.SCALOGRAM,
        metadata={'feature': 'scalogram', 'sample_rate': '48000', 'clip_id': 'park-c0-0', 'city': 'c0'},
    )


def tiny_gan(**kwargs):
    defaults = dict(noise_dim=4, width=1, hidden=8, embed_dim=2, epochs=1, snapshot_epochs=[1], batch_size=4)
    defaults.update(kwargs)
    return GanConfig(**defaults)


def fixed_candidates(total):
    def generate(sub_train, count_per_class, scenes, rng):
        return oracle_candidates(sub_train, 1, [scenes[i % len(scenes)] for i in range(total)], rng)

    return generate


def scripted(*accuracies, sizes=None):
    """按顺序返回预设准确率, 并记录训练集大小"""
    values = iter(accuracies)

    def score(factory, train, val, test, train_config, seed):
        if sizes is not None:
            sizes.append(len(train))
        return next(values)

    return score


def factory(seed):
    return build_dcnn(1, 16, fc_units=8, n_classes=2, compact=True, seed=seed)


def database(rng, **kwargs):
    return AugmentedDatabase(real=city_set(rng), label_set=LABELS, **kwargs)


class TestCitySplit:
    """测试按城市划分"""

    def test_equal_cities(self, rng):
        group_a, group_b = partition_cities({0: 10, 1: 10, 2: 10, 3: 10}, rng)
        assert len(group_a) == len(group_b) == 2
        assert group_a | group_b == {0, 1, 2, 3}

    def test_minimal_imbalance(self, rng):
        sizes = {0: 10, 1: 10, 2: 9, 3: 11}
        total = sum(sizes.values())
        oracle = min(
            abs(total - 2 * sum(sizes[c] for c in combo))
            for r in range(1, len(sizes)) for combo in itertools.combinations(sizes, r)
        )
        group_a, _ = partition_cities(sizes, rng)
        gap = abs(total - 2 * sum(sizes[c] for c in group_a))
        assert gap == oracle == 0

    def test_greedy_above_threshold(self, rng):
        sizes = {c: int(s) for c, s in enumerate(rng.integers(5, 20, 15))}
        group_a, group_b = partition_cities(sizes, rng, exhaustive_max=12)
        assert group_a and group_b and not group_a & group_b
        assert group_a | group_b == set(sizes)
        assert abs(sum(sizes[c] for c in group_a) - sum(sizes[c] for c in group_b)) <= max(sizes.values())

    def test_disjoint_over_many_splits(self):
        data = city_set(np.random.default_rng(0))
        for seed in range(100):
            sub_train, sub_test = city_split(data, np.random.default_rng(seed))
            assert not set(sub_train.cities.tolist()) & set(sub_test.cities.tolist())
            assert len(sub_train) + len(sub_test) == len(data)
            assert len(sub_train) == len(sub_test)

    def test_both_sides_become_train(self):
        data = city_set(np.random.default_rng(0))
        train_sides = {tuple(sorted(set(city_split(data, np.random.default_rng(s))[0].cities.tolist())))
                       for s in range(40)}
        assert len(train_sides) > 1

    def test_single_city(self, rng):
        data = city_set(rng, cities=1)
        with pytest.raises(errors.SplitError):
            city_split(data, rng)

    def test_missing_cities(self, rng):
        data = city_set(rng)
        data.cities = None
        with pytest.raises(errors.SplitError):
            city_split(data, rng)


class TestRound:
    """测试单轮筛选与决策"""

    @pytest.mark.parametrize('acc_b,decision', [
        (0.6, RoundDecision.ACCEPTED),
        (0.5, RoundDecision.REJECTED),
        (0.4, RoundDecision.REJECTED),
    ])
    def test_accepted_iff_b_beats_a(self, rng, monkeypatch, acc_b, decision):
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.5, acc_b))
        round_ = run_round(database(rng), factory, oracle_candidates, TrainConfig(), rng)
        assert round_.status == RoundStatus.COMPLETED
        assert round_.decision == decision

    def test_b_trains_on_candidates(self, rng, monkeypatch):
        sizes = []
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.5, 0.6, sizes=sizes))
        round_ = run_round(database(rng), factory, oracle_candidates, TrainConfig(), rng)
        assert sizes[1] - sizes[0] == len(round_.candidates)

    def test_candidate_count_per_class(self, rng, monkeypatch):
        """sub-train 12 片段 / 2 类, 比例 0.5 -> 每类 3 个"""
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.5, 0.6))
        round_ = run_round(database(rng), factory, oracle_candidates, TrainConfig(), rng, candidate_fraction=0.5)
        scenes = [m.metadata['scene'] for m in round_.candidates]
        assert scenes.count('park') == scenes.count('tram') == 3
        assert all(m.metadata['round'] == '0' for m in round_.candidates)

    def test_split_recorded(self, rng, monkeypatch):
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.5, 0.6))
        db = database(rng)
        round_ = run_round(db, factory, oracle_candidates, TrainConfig(), rng)
        assert sorted(round_.sub_train + round_.sub_test) == sorted(db.real.clip_ids)
        assert len(round_.split_hash) == 64

    def test_rejected_round_leaves_database(self, rng, monkeypatch):
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.7, 0.6))
        db = database(rng)
        before = db.digest()
        round_ = run_round(db, factory, oracle_candidates, TrainConfig(), rng)
        after = apply_decision(db, round_)
        assert after is db
        assert after.digest() == before

    def test_accepting_adds_fakes(self, rng, monkeypatch):
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.5, 0.6))
        db = database(rng)
        round_ = run_round(db, factory, fixed_candidates(50), TrainConfig(), rng)
        after = apply_decision(db, round_)
        assert after.fake_count == db.fake_count + 50
        assert len(after.all_features()) == len(db.real) + 50
        np.testing.assert_array_equal(after.real.features, db.real.features)

    def test_double_apply_is_noop(self, rng, monkeypatch):
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.5, 0.6))
        db = database(rng)
        round_ = run_round(db, factory, oracle_candidates, TrainConfig(), rng)
        once = apply_decision(db, round_)
        twice = apply_decision(once, round_)
        assert twice.digest() == once.digest()
        assert twice.fake_count == once.fake_count

    def test_incomplete_round(self, rng):
        pending = AugmentationRound(index=0, sub_train=['a'], sub_test=['b'])
        with pytest.raises(errors.ContractError):
            apply_decision(database(rng), pending)
        with pytest.raises(errors.ContractError):
            pending.to_record()

    def test_divergence_rejects_round(self, rng, monkeypatch):
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.5))

        def diverging(*args):
            raise errors.GanDivergenceError(data={'dis_loss': float('nan')})

        round_ = run_round(database(rng), factory, diverging, TrainConfig(), rng)
        assert round_.decision == RoundDecision.REJECTED
        assert round_.accuracy_b is None
        assert round_.diagnostic
        assert round_.to_record().accuracy_b is None

    def test_diverging_gan_rejects_round(self, rng, monkeypatch):
        """GAN 训练中出现非有限值时本轮作废, 不中断增强"""
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.5))

        def diverging_gan(sub_train, count_per_class, scenes, rng_):
            config = tiny_gan()
            triple = GanTriple(sub_train.features.shape[1:], len(LABELS), config)
            _, weight = triple.role_parameters('generator')[0]
            weight.data = np.full_like(weight.data, np.inf)
            train_gan(triple, sub_train.features, sub_train.labels, config, rng_)
            return []

        db = AugmentedDatabase(real=city_set(rng, frames=4), label_set=LABELS)
        round_ = run_round(db, factory, diverging_gan, TrainConfig(), rng)
        assert round_.status == RoundStatus.COMPLETED
        assert round_.decision == RoundDecision.REJECTED
        assert round_.accuracy_b is None
        assert round_.diagnostic
        assert apply_decision(db, round_).fake_count == 0

    def test_gan_candidates_follow_real_features(self, rng, monkeypatch, tmp_path):
        """候选与真实特征的帧参数、声道编码、特征类型一致, 写盘后仍然一致"""
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.5, 0.6))
        db = AugmentedDatabase(real=city_set(rng, frames=4), label_set=LABELS)
        template = real_template()
        round_ = run_round(db, factory, gan_candidates(tiny_gan(), LABELS, template), TrainConfig(), rng,
                           candidate_dir=tmp_path)
        written = [read_feature_cache(f) for f in sorted((tmp_path / 'round0').glob('*.scnf'))]
        assert round_.candidates and len(written) == len(round_.candidates)
        for fake in round_.candidates + written:
            assert fake.feature_kind == FeatureKind.SCALOGRAM
            assert fake.channel_mode == ChannelMode.AVE_DIFF
            assert (fake.hop_ms, fake.win_ms) == (template.hop_ms, template.win_ms)
            assert fake.metadata['feature'] == 'scalogram'
            assert 'city' not in fake.metadata

    def test_fake_cities_cycle(self, rng, monkeypatch):
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.5, 0.6))
        db = database(rng, n_cities=4)
        after = apply_decision(db, run_round(db, factory, fixed_candidates(6), TrainConfig(), rng))
        assert after.fake_features().cities.tolist() == [0, 1, 2, 3, 0, 1]
        assert after.all_features().cities is not None

    def test_candidates_written(self, rng, monkeypatch, tmp_path):
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.5, 0.6))
        round_ = run_round(database(rng), factory, oracle_candidates, TrainConfig(), rng, candidate_dir=tmp_path)
        files = sorted((tmp_path / 'round0').glob('*.scnf'))
        assert len(files) == len(round_.candidates)
        assert read_feature_cache(files[0]).metadata['provenance'] == 'generated'

    def test_with_real_training(self, rng):
        config = TrainConfig(max_epochs=2, patience=1, batch_size=4)
        round_ = run_round(database(rng), factory, oracle_candidates, config, rng)
        assert 0.0 <= round_.accuracy_a <= 1.0
        assert (round_.decision == RoundDecision.ACCEPTED) == (round_.accuracy_b > round_.accuracy_a)


class TestLedger:
    """测试轮次账本"""

    def test_rounds_logged(self, rng, monkeypatch, tmp_path):
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.5, 0.6, 0.6, 0.55))
        path = tmp_path / 'ledger.jsonl'
        db, rounds = run_rounds(database(rng), factory, oracle_candidates, TrainConfig(), AugmentConfig(rounds=2),
                                ledger_path=path)
        records = read_ledger(path)
        assert [r.index for r in records] == [0, 1]
        assert [r.decision for r in records] == [RoundDecision.ACCEPTED, RoundDecision.REJECTED]
        assert records[0].split_hash == rounds[0].split_hash
        assert db.accepted_rounds == [0]

    def test_rounds_are_reproducible(self, rng, monkeypatch):
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.5, 0.6, 0.5, 0.6))
        db = database(rng)
        first, _ = run_rounds(db, factory, oracle_candidates, TrainConfig(), AugmentConfig(rounds=1), seed=3)
        second, _ = run_rounds(db, factory, oracle_candidates, TrainConfig(), AugmentConfig(rounds=1), seed=3)
        assert first.digest() == second.digest()

    def test_missing_ledger(self, tmp_path):
        assert read_ledger(tmp_path / 'none.jsonl') == []

    def test_corrupt_line(self, rng, monkeypatch, tmp_path):
        monkeypatch.setattr(protocol, '_train_and_score', scripted(0.5, 0.6))
        round_ = run_round(database(rng), factory, oracle_candidates, TrainConfig(), rng)
        path = tmp_path / 'ledger.jsonl'
        append_record(path, round_.to_record())
        with open(path, 'ab') as fh:
            fh.write(b'{"index": "x"\n')
        with pytest.raises(errors.CorruptionError):
            read_ledger(path)


@pytest.mark.slow
class TestWithGan:
    """用真实 GAN 生成候选"""

    def test_gan_candidates_round(self, rng):
        gan_config = GanConfig(noise_dim=4, width=1, hidden=8, embed_dim=2, epochs=2, snapshot_epochs=[1, 2],
                               batch_size=4)
        db = AugmentedDatabase(real=city_set(rng, frames=4), label_set=LABELS)
        train_config = TrainConfig(max_epochs=2, patience=1, batch_size=4)
        round_ = run_round(db, factory, gan_candidates(gan_config, LABELS, real_template()), train_config, rng)
        assert round_.status == RoundStatus.COMPLETED
        assert {m.metadata['epoch'] for m in round_.candidates} == {'1', '2'}
        assert all(m.shape == (4, 1, 16) for m in round_.candidates)

    def test_noise_candidates_rarely_help(self, rng):
        """纯噪声候选不应让 B 稳定胜过 A"""

        def noise(sub_train, count_per_class, scenes, rng_):
            maps = oracle_candidates(sub_train, count_per_class, scenes, rng_)
            for m in maps:
                m.data = rng_.normal(scale=5.0, size=m.data.shape).astype(np.float32)
            return maps

        train_config = TrainConfig(max_epochs=3, patience=2, batch_size=4)
        db, rounds = run_rounds(database(rng), factory, noise, train_config, AugmentConfig(rounds=3))
        assert sum(r.decision == RoundDecision.ACCEPTED for r in rounds) <= 2
        assert db.fake_count == sum(len(r.candidates) for r in rounds if r.decision == RoundDecision.ACCEPTED)
