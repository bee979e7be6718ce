import math

import numpy as np
import pytest

from cvlab.crossval import cross_validate, make_folds, oracle_excess_risk
from cvlab.dgp import Dataset, Dgp, sample_dataset
from cvlab.errors import (
    InvalidConfigError,
    InvalidInputError,
    InvalidRateError,
    UndefinedOobError,
    UnsupportedLawError,
)
from cvlab.learners import (
    BoostedStumpsLearner,
    ConstantLearner,
    DeclaredRate,
    ForestLearner,
    KernelLearner,
    KnnLearner,
    LearnerSpec,
    PowerRule,
    SyntheticLearner,
    oob_error,
)


def const(v):
    return lambda n: v


class TestDeclaredRate:
    @pytest.mark.parametrize("g", [0.25, 0.5, 0.1])
    def test_gamma_band(self, g):
        with pytest.raises(InvalidRateError):
            DeclaredRate(g, 1.0, 1.0)

    def test_constants(self):
        with pytest.raises(InvalidRateError):
            DeclaredRate(0.3, 2.0, 1.0)
        with pytest.raises(InvalidRateError):
            DeclaredRate(0.3, 0.0, 1.0)


class TestSynthetic:
    def test_zero_amplitude_is_oracle(self, dgp, small_data, probe):
        rule = SyntheticLearner(0.4, 0.0, dgp).fit(small_data, 3)
        np.testing.assert_array_equal(rule.predict(probe), dgp.mu(probe))
        assert oracle_excess_risk(rule, dgp, 1000, 0).value == 0.0

    def test_exact_excess_risk(self, dgp):
        data = sample_dataset(dgp, 10_000, 1)
        rule = SyntheticLearner(0.4, 1.0, dgp).fit(data, 9)
        assert rule.excess_risk == pytest.approx(10_000 ** -0.8, rel=1e-12)
        assert rule.excess_risk == pytest.approx(6.3096e-4, rel=1e-4)

    def test_monte_carlo_excess_risk(self, dgp):
        data = sample_dataset(dgp, 400, 1)
        rule = SyntheticLearner(0.35, 1.5, dgp).fit(data, 4)
        est = oracle_excess_risk(rule, dgp, 1_000_000, 8)
        assert est.value == pytest.approx(1.5**2 * 400 ** -0.7, rel=0.01)

    def test_declared_rate(self, dgp):
        assert SyntheticLearner(0.3, 2.0, dgp).declared_rate == DeclaredRate(0.3, 2.0, 2.0)
        assert SyntheticLearner(0.3, 0.0, dgp).declared_rate is None

    def test_rejects_bad_gamma_and_law(self, dgp):
        with pytest.raises(InvalidRateError):
            SyntheticLearner(0.6, 1.0, dgp)
        with pytest.raises(UnsupportedLawError):
            SyntheticLearner(0.3, 1.0, Dgp(x_law="uniform"))

    def test_ignores_responses(self, dgp, small_data, probe):
        L = SyntheticLearner(0.3, 1.0, dgp)
        other = small_data.with_responses(np.zeros(small_data.n))
        np.testing.assert_array_equal(L.fit(small_data, 5).predict(probe),
                                      L.fit(other, 5).predict(probe))

    def test_excess_risk_strictly_decreasing_in_n(self, dgp):
        L = SyntheticLearner(0.3, 1.0, dgp)
        risks = [L.fit(sample_dataset(dgp, n, 0), 0).excess_risk for n in (10, 40, 160, 640)]
        assert all(b < a for a, b in zip(risks, risks[1:]))


def brute_knn(X, y, q, k):
    d = [(float(((X[i] - q) ** 2).sum()), i) for i in range(len(y))]
    d.sort()
    return np.mean([y[i] for _, i in d[:k]])


class TestKnn:
    def test_k_equals_n_is_global_mean(self, small_data, probe):
        rule = KnnLearner(lambda n: n).fit(small_data)
        np.testing.assert_allclose(rule.predict(probe), small_data.responses.mean(), rtol=1e-13)

    def test_one_nn_returns_training_response(self, small_data):
        rule = KnnLearner(const(1)).fit(small_data)
        np.testing.assert_array_equal(rule.predict(small_data.features), small_data.responses)

    def test_hand_built_matches_brute_force(self):
        X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [3.0, 3.0], [-1.0, -1.0]])
        y = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
        rule = KnnLearner(const(3)).fit(Dataset(X, y))
        Q = np.array([[0.1, 0.1], [2.0, 2.0], [-3.0, 0.0], [0.5, 0.0]])
        expected = [brute_knn(X, y, q, 3) for q in Q]
        # (0.1,0.1): points 0, 1, 4 -> 19/3
        assert expected[0] == pytest.approx(19 / 3)
        np.testing.assert_allclose(rule.predict(Q), expected, rtol=1e-14)

    def test_ties_go_to_lowest_index(self):
        X = np.array([[1.0], [-1.0], [1.0]])
        y = np.array([10.0, 20.0, 30.0])
        assert KnnLearner(const(1)).fit(Dataset(X, y)).predict([0.0]) == 10.0
        assert KnnLearner(const(2)).fit(Dataset(X, y)).predict([0.0]) == 15.0

    @pytest.mark.parametrize("seed", range(5))
    def test_random_small_sets_match_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 50))
        X, y = rng.standard_normal((n, 3)), rng.standard_normal(n)
        k = int(rng.integers(1, n + 1))
        Q = rng.standard_normal((6, 3))
        rule = KnnLearner(const(k)).fit(Dataset(X, y))
        np.testing.assert_allclose(rule.predict(Q), [brute_knn(X, y, q, k) for q in Q],
                                   rtol=1e-12)

    def test_bad_k(self, small_data):
        with pytest.raises(InvalidInputError):
            KnnLearner(const(0)).fit(small_data)
        with pytest.raises(InvalidInputError):
            KnnLearner(lambda n: n + 1).fit(small_data)


def direct_nw(X, y, q, h):
    w = [math.exp(-float(((x - q) ** 2).sum()) / (2 * h * h)) for x in X]
    return sum(wi * yi for wi, yi in zip(w, y)) / sum(w)


class TestKernel:
    def test_huge_bandwidth_is_global_mean(self, small_data, probe):
        rule = KernelLearner(const(1e9)).fit(small_data)
        np.testing.assert_allclose(rule.predict(probe), small_data.responses.mean(), atol=1e-6)

    def test_single_point(self, probe):
        d = Dataset(np.zeros((1, 10)), np.array([4.5]))
        np.testing.assert_array_equal(KernelLearner(const(0.3)).fit(d).predict(probe), 4.5)

    def test_four_points_direct_weights(self):
        X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        y = np.array([0.0, 1.0, 2.0, 3.0])
        q = np.array([0.0, 0.0])
        # weights 1, e^-1/2, e^-1/2, e^-1
        a, b = math.exp(-0.5), math.exp(-1.0)
        hand = (a * 1.0 + a * 2.0 + b * 3.0) / (1.0 + 2 * a + b)
        rule = KernelLearner(const(1.0)).fit(Dataset(X, y))
        assert rule.predict(q) == pytest.approx(hand, rel=1e-14)
        Q = np.array([[0.3, -0.2], [2.0, 2.0]])
        np.testing.assert_allclose(rule.predict(Q), [direct_nw(X, y, x, 1.0) for x in Q],
                                   rtol=1e-13)

    def test_underflow_falls_back_to_mean(self):
        d = Dataset(np.array([[0.0], [0.1]]), np.array([1.0, 3.0]))
        assert KernelLearner(const(1e-3)).fit(d).predict([100.0]) == 2.0

    def test_nonpositive_bandwidth(self, small_data):
        with pytest.raises(InvalidInputError):
            KernelLearner(const(0.0)).fit(small_data)


class TestBoostedStumps:
    def test_constant_responses(self, probe):
        X = np.random.default_rng(0).standard_normal((30, 10))
        d = Dataset(X, np.full(30, 2.5))
        rule = BoostedStumpsLearner(max_rounds=1, internal_cv_folds=0).fit(d)
        np.testing.assert_allclose(rule.predict(probe), 2.5, rtol=0, atol=1e-15)
        np.testing.assert_allclose(rule.predict(X) - 2.5, 0.0, atol=1e-15)
        cv_rule = BoostedStumpsLearner(max_rounds=5).fit(d, 1)
        np.testing.assert_allclose(cv_rule.predict(probe), 2.5, atol=1e-15)

    def test_indicator_one_round(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((500, 10))
        y = (X[:, 0] > 0).astype(float)
        rule = BoostedStumpsLearner(max_rounds=1, learning_rate=1.0,
                                    internal_cv_folds=0).fit(Dataset(X, y))
        assert rule.feats[0] == 0 and abs(rule.thrs[0]) < 0.05
        assert np.mean((rule.predict(X) - y) ** 2) < 0.01

    @pytest.mark.parametrize("seed", range(4))
    def test_single_stump_is_exhaustive_best(self, seed):
        from tests.test_kernels import brute_best_split

        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 51))
        X, y = rng.standard_normal((n, 3)), rng.standard_normal(n)
        rule = BoostedStumpsLearner(max_rounds=1, learning_rate=1.0,
                                    internal_cv_folds=0).fit(Dataset(X, y))
        _, f, thr, lv, rv = brute_best_split(X, y - y.mean(), np.ones(n))
        assert (rule.feats[0], rule.thrs[0]) == (f, thr)
        assert rule.lefts[0] == pytest.approx(lv, abs=1e-12)

    def test_internal_cv_picks_rounds(self, dgp):
        d = sample_dataset(dgp, 300, 2)
        rule = BoostedStumpsLearner(max_rounds=200, learning_rate=0.3, patience=5).fit(d, 1)
        assert 1 <= rule.rounds <= 200
        curve = rule.cv_curve[~np.isnan(rule.cv_curve)]
        assert rule.rounds == int(np.argmin(curve)) + 1
        assert len(curve) <= rule.rounds + 5

    def test_config_errors(self, dgp):
        with pytest.raises(InvalidConfigError):
            BoostedStumpsLearner(max_rounds=0)
        with pytest.raises(InvalidConfigError):
            BoostedStumpsLearner(learning_rate=1.5)
        with pytest.raises(InvalidConfigError):
            BoostedStumpsLearner(internal_cv_folds=5).fit(sample_dataset(dgp, 4, 0))


class TestForest:
    def test_single_root_node(self, small_data, probe):
        rule = ForestLearner(num_trees=1, subsample=1.0, mtry=10,
                             min_leaf=small_data.n).fit(small_data)
        np.testing.assert_allclose(rule.predict(probe), small_data.responses.mean(), rtol=1e-14)

    def test_constant_responses(self, small_data, probe):
        d = small_data.with_responses(np.full(small_data.n, -1.25))
        rule = ForestLearner(num_trees=5, min_leaf=2).fit(d, 4)
        np.testing.assert_array_equal(rule.predict(probe), -1.25)

    def test_prediction_is_tree_average(self, small_data, probe):
        rule = ForestLearner(num_trees=7, min_leaf=3, mtry=4).fit(small_data, 2)
        per_tree = rule.tree_predictions(probe)
        assert per_tree.shape == (7, len(probe))
        np.testing.assert_allclose(rule.predict(probe), per_tree.sum(axis=0) / 7, rtol=1e-14)

    def test_inbag_records(self, small_data):
        rule = ForestLearner(num_trees=3, subsample=0.5).fit(small_data, 1)
        assert rule.inbag.shape == (3, small_data.n)
        assert np.all(rule.inbag.sum(axis=1) == 20)
        boot = ForestLearner(num_trees=3, subsample=1.0, bootstrap=True).fit(small_data, 1)
        assert np.all(boot.inbag.sum(axis=1) < small_data.n)

    def test_oob_undefined_without_holdout(self, small_data):
        rule = ForestLearner(num_trees=3, subsample=1.0).fit(small_data, 1)
        with pytest.raises(UndefinedOobError):
            oob_error(rule, small_data)

    def test_oob_single_tree_half_sample(self, small_data):
        rule = ForestLearner(num_trees=1, subsample=0.5, min_leaf=3).fit(small_data, 6)
        est = oob_error(rule, small_data)
        out = ~rule.inbag[0]
        pred = rule.predict(small_data.features[out])
        assert est.n_used == out.sum() == 20 and est.n_skipped == 20
        assert est.error == pytest.approx(np.mean((small_data.responses[out] - pred) ** 2))

    def test_oob_rejects_foreign_dataset(self, small_data, dgp):
        rule = ForestLearner(num_trees=2).fit(small_data, 1)
        with pytest.raises(InvalidInputError):
            oob_error(rule, sample_dataset(dgp, 40, 99))

    @pytest.mark.parametrize("kwargs", [dict(num_trees=0), dict(subsample=0.0),
                                        dict(subsample=1.5), dict(mtry=0), dict(min_leaf=0)])
    def test_config_errors(self, kwargs):
        with pytest.raises(InvalidConfigError):
            ForestLearner(**kwargs)

    def test_mtry_above_p(self, small_data):
        with pytest.raises(InvalidConfigError):
            ForestLearner(mtry=11).fit(small_data)

    @pytest.mark.slow
    def test_oob_agrees_with_kfold(self, dgp):
        oob, cv = [], []
        learner = ForestLearner(num_trees=60, min_leaf=20, mtry=3)
        for rep in range(6):
            d = sample_dataset(dgp, 800, 300 + rep)
            oob.append(oob_error(learner.fit(d, rep), d).error)
            cv.append(cross_validate(learner, d, make_folds(800, 10, rep), rep))
        assert np.mean(oob) == pytest.approx(np.mean(cv), rel=0.10)


LEARNERS = [
    lambda dgp: SyntheticLearner(0.3, 1.0, dgp),
    lambda dgp: KnnLearner(PowerRule(1.0, 0.5, integer=True)),
    lambda dgp: KernelLearner(PowerRule(1.0, -0.2)),
    lambda dgp: BoostedStumpsLearner(max_rounds=30),
    lambda dgp: ForestLearner(num_trees=5, min_leaf=3),
    lambda dgp: ConstantLearner(0.2),
]


@pytest.mark.parametrize("make", LEARNERS)
def test_refit_is_bitwise_reproducible(make, dgp, small_data, probe):
    learner = make(dgp)
    a = learner.fit(small_data, 17).predict(probe)
    b = learner.fit(small_data, 17).predict(probe)
    np.testing.assert_array_equal(a, b)


def test_single_point_predict_returns_float(dgp, small_data):
    rule = ForestLearner(num_trees=2).fit(small_data)
    assert isinstance(rule.predict(np.zeros(10)), float)
    with pytest.raises(InvalidInputError):
        rule.predict(np.zeros((2, 3)))


class TestSpecs:
    @pytest.mark.parametrize("block", [
        {"name": "a", "kind": "constant", "value": 1.0},
        {"name": "s", "kind": "synthetic", "gamma": 0.3},
        {"name": "k", "kind": "knn", "k": 5},
        {"name": "k2", "kind": "knn", "k_scale": 2.0, "k_exponent": 0.5},
        {"name": "h", "kind": "kernel", "bandwidth": 0.5},
        {"name": "b", "kind": "boosted_stumps", "max_rounds": 10},
        {"name": "f", "kind": "forest", "num_trees": 3, "evaluation": "oob"},
    ])
    def test_round_trip_and_build(self, block, dgp, small_data):
        spec = LearnerSpec.from_dict(block)
        assert LearnerSpec.from_dict(spec.to_dict()) == spec
        rule = spec.build(dgp).fit(small_data, 0)
        assert rule.training_n == small_data.n

    @pytest.mark.parametrize("block", [
        {"name": "x", "kind": "svm"},
        {"name": "x", "kind": "knn", "bandwidth": 1.0},
        {"name": "x", "kind": "knn", "evaluation": "oob"},
        {"name": "x", "kind": "synthetic"},
        {"kind": "knn"},
    ])
    def test_rejects(self, block):
        with pytest.raises(InvalidConfigError):
            LearnerSpec.from_dict(block)
