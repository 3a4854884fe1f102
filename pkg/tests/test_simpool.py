import numpy as np
import pytest

from galaxy_al.builder import validate_score_matrix
from galaxy_al.core import InputError, LabeledSet
from galaxy_al.simpool import (
    IMBALANCE_PRESETS,
    QualityModel,
    SyntheticScoreProvider,
    balanced_accuracy,
    id_label_fraction,
    make_imbalanced_pool,
    make_preset_pool,
    make_separable_pool,
    run_strategy,
)


class TestPresets:
    def test_cifar100_2_sizes(self):
        pool, _ = make_preset_pool("cifar100-2", QualityModel(), 0)
        assert pool.n == 50_000
        assert pool.k == 2
        assert int(np.sum(pool.true_labels == 0)) == 500
        assert pool.epsilon == pytest.approx(0.0101)

    def test_svhn_3_sizes(self):
        pool, _ = make_preset_pool("svhn-3", QualityModel(), 0)
        assert pool.k == 3
        counts = [int(np.sum(pool.true_labels == c)) for c in range(3)]
        assert counts == [13862, 4947, 54448]
        assert pool.epsilon == pytest.approx(0.2546)

    def test_every_preset_ood_is_majority(self):
        for name in IMBALANCE_PRESETS:
            pool, _ = make_preset_pool(name, QualityModel(), 0)
            counts = np.bincount(pool.true_labels, minlength=pool.k)
            assert counts[pool.k - 1] == counts.max()

    def test_unknown_preset(self):
        with pytest.raises(InputError):
            make_preset_pool("mnist-11", QualityModel(), 0)


class TestMakeImbalancedPool:
    def test_epsilon_inequality_holds_exactly(self):
        for eps in (0.01, 0.1, 0.25):
            for k in (2, 3, 5):
                pool, _ = make_imbalanced_pool(5000, k, eps, QualityModel(), 0)
                counts = np.bincount(pool.true_labels, minlength=k)
                n_od = counts[k - 1]
                assert counts.sum() == 5000
                for c in range(k - 1):
                    assert counts[c] <= eps * n_od
                    assert counts[c] >= 1

    def test_determinism(self):
        a, pa = make_imbalanced_pool(500, 3, 0.1, QualityModel(), 7)
        b, pb = make_imbalanced_pool(500, 3, 0.1, QualityModel(), 7)
        assert np.array_equal(a.true_labels, b.true_labels)
        s = LabeledSet()
        assert np.array_equal(pa.scores(s), pb.scores(s))

    def test_rejects_bad_args(self):
        with pytest.raises(InputError):
            make_imbalanced_pool(100, 1, 0.1, QualityModel(), 0)
        with pytest.raises(InputError):
            make_imbalanced_pool(100, 2, 0.0, QualityModel(), 0)
        with pytest.raises(InputError):
            make_imbalanced_pool(3, 4, 0.01, QualityModel(), 0)


class TestSeparablePool:
    def test_single_cut_ranking(self):
        pool, scores = make_separable_pool(4, 12, 0.0, 3)
        order = np.argsort(scores[:, 1], kind="stable")
        labels_by_rank = pool.true_labels[order]
        assert np.all(labels_by_rank[:4] == 0)
        assert np.all(labels_by_rank[4:] == 1)

    def test_skew_places_uncertain_band_in_ood(self):
        pool, scores = make_separable_pool(10, 90, 0.3, 0)
        order = np.argsort(np.abs(scores.max(axis=1) - 0.5), kind="stable")
        # the 20 least-confident examples are all OOD
        assert np.all(pool.true_labels[order[:20]] == 1)

    def test_scores_valid(self):
        _, scores = make_separable_pool(5, 5, 0.1, 0)
        validate_score_matrix(scores)

    def test_rejects_bad_skew(self):
        with pytest.raises(InputError):
            make_separable_pool(2, 2, 0.5, 0)


class TestBalancedAccuracy:
    def test_perfect(self):
        assert balanced_accuracy([0, 1, 1], [0, 1, 1], 2) == 1.0

    def test_majority_only_predictor(self):
        # predicting OOD everywhere scores 0.5 regardless of imbalance
        truths = [0] * 2 + [1] * 98
        assert balanced_accuracy([1] * 100, truths, 2) == 0.5

    def test_mixed(self):
        preds = [0, 0, 1, 1, 1, 1, 1, 1]
        truths = [0, 1, 1, 1, 1, 1, 1, 0]
        # class 0: 1 of 2 right; class 1: 5 of 6 right
        assert balanced_accuracy(preds, truths, 2) == pytest.approx(
            0.5 * (0.5 + 5 / 6)
        )

    def test_invariant_to_class_sizes(self):
        rng = np.random.default_rng(0)
        truths = np.array([0] * 10 + [1] * 1000)
        preds = truths.copy()
        preds[:5] = 1
        preds[10:510] = 0
        small = balanced_accuracy(preds[:20], truths[:20], 2)
        assert balanced_accuracy(preds, truths, 2) == pytest.approx(
            0.5 * (0.5 + 0.5)
        )

    def test_empty_class_warns_and_excludes(self):
        with pytest.warns(UserWarning):
            acc = balanced_accuracy([0, 0], [0, 0], 3)
        assert acc == 1.0

    def test_errors(self):
        with pytest.raises(InputError):
            balanced_accuracy([], [], 2)
        with pytest.raises(InputError):
            balanced_accuracy([0, 1], [0], 2)
        with pytest.raises(InputError):
            balanced_accuracy([0, 2], [0, 1], 2)


class TestIdLabelFraction:
    def make(self, labels):
        s = LabeledSet()
        for i, v in enumerate(labels):
            s.add(i, v)
        return s

    def test_none_id(self):
        assert id_label_fraction(self.make([1, 1, 1]), {0}) == 0.0

    def test_all_id(self):
        assert id_label_fraction(self.make([0, 0]), {0}) == 1.0

    def test_partial(self):
        labeled = self.make([0, 1, 0, 2, 2, 2, 2, 2, 2, 2])
        assert id_label_fraction(labeled, {0, 1}) == pytest.approx(0.3)

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            id_label_fraction(LabeledSet(), {0})


class TestSyntheticScoreProvider:
    def test_scores_are_valid_matrix(self):
        pool, provider = make_imbalanced_pool(300, 3, 0.1, QualityModel(), 1)
        validate_score_matrix(provider.scores(LabeledSet()))

    def test_deterministic_in_label_counts(self):
        pool, provider = make_imbalanced_pool(200, 2, 0.1, QualityModel(), 2)
        a = LabeledSet()
        a.add(0, 0)
        a.add(5, 1)
        b = LabeledSet()
        b.add(7, 0)
        b.add(9, 1)
        # same per-class counts give byte-identical scores
        assert np.array_equal(provider.scores(a), provider.scores(b))

    def test_sharpens_with_labels(self):
        q = QualityModel(noise0=2.0, gain=5.0)
        pool, provider = make_imbalanced_pool(400, 2, 0.2, q, 3)
        few = LabeledSet()
        many = LabeledSet()
        for i in range(60):
            many.add(i, pool.oracle(i))
        acc_few = float(
            (np.argmax(provider.scores(few), axis=1) == pool.true_labels).mean()
        )
        acc_many = float(
            (np.argmax(provider.scores(many), axis=1) == pool.true_labels).mean()
        )
        assert acc_many > acc_few

    def test_skew_band_confuses_confidence(self):
        q = QualityModel(skew=0.4, noise0=0.1)
        pool, provider = make_imbalanced_pool(1000, 2, 0.05, q, 4)
        s = provider.scores(LabeledSet())
        order = np.argsort(s.max(axis=1), kind="stable")
        least_confident = order[:50]
        frac_id = float((pool.true_labels[least_confident] == 0).mean())
        assert frac_id < 0.2

    def test_label_noise_flips_some_boosts(self):
        q = QualityModel(label_noise=0.3, noise0=0.0)
        pool, provider = make_imbalanced_pool(500, 2, 0.2, q, 5)
        preds = np.argmax(provider.scores(LabeledSet()), axis=1)
        errs = float((preds != pool.true_labels).mean())
        assert 0.05 < errs < 0.45


class TestRunStrategy:
    def test_unknown_strategy(self):
        pool, provider = make_imbalanced_pool(100, 2, 0.2, QualityModel(), 0)
        with pytest.raises(InputError):
            run_strategy(pool, provider, "entropy", 2, 5, 0)

    def test_row_shape_and_budget(self):
        pool, provider = make_imbalanced_pool(200, 2, 0.2, QualityModel(), 0)
        for name in ("galaxy", "confidence", "mlp", "random"):
            rows = run_strategy(pool, provider, name, 3, 10, 0)
            assert [r.labels_used for r in rows] == [10, 20, 30]
            assert all(r.strategy == name for r in rows)
            assert all(0.0 <= r.acc_bal <= 1.0 for r in rows)

    def test_budget_over_pool_rejected(self):
        pool, provider = make_imbalanced_pool(30, 2, 0.2, QualityModel(), 0)
        with pytest.raises(InputError):
            run_strategy(pool, provider, "random", 4, 10, 0)

    def test_deterministic(self):
        pool, provider = make_imbalanced_pool(200, 2, 0.2, QualityModel(), 1)
        a = run_strategy(pool, provider, "galaxy", 3, 8, 11)
        b = run_strategy(pool, provider, "galaxy", 3, 8, 11)
        assert a == b
