"""The numba and numpy kernel backends against each other and brute force."""

import numpy as np
import pytest

from cvlab.kernels import _jit, _np
from cvlab.learners.boosting import presort

BACKENDS = [pytest.param(_jit, id="numba"), pytest.param(_np, id="numpy")]


@pytest.fixture
def data():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((60, 4))
    y = np.sin(X[:, 0]) + 0.3 * rng.standard_normal(60)
    return X, y, rng.standard_normal((17, 4))


def brute_best_split(X, r, w):
    """Exhaustive (coordinate, midpoint) scan by direct SSE."""
    act = w > 0
    Xa, ra = X[act], r[act]
    best = None
    for f in range(X.shape[1]):
        vals = np.unique(Xa[:, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            thr = (lo + hi) * 0.5
            left = Xa[:, f] <= thr
            sse = ((ra[left] - ra[left].mean()) ** 2).sum() + (
                (ra[~left] - ra[~left].mean()) ** 2).sum()
            if best is None or sse < best[0] - 1e-12:
                best = (sse, f, thr, ra[left].mean(), ra[~left].mean())
    return best


@pytest.mark.parametrize("k", [1, 3, 60])
def test_knn_backends_agree(data, k):
    X, y, Q = data
    np.testing.assert_allclose(_jit.knn_predict(X, y, Q, k), _np.knn_predict(X, y, Q, k),
                               rtol=0, atol=1e-12)


@pytest.mark.parametrize("h", [0.05, 0.7, 1e9])
def test_nw_backends_agree(data, h):
    X, y, Q = data
    np.testing.assert_allclose(_jit.nw_predict(X, y, Q, h, -1.0),
                               _np.nw_predict(X, y, Q, h, -1.0), rtol=1e-12)


@pytest.mark.parametrize("mod", BACKENDS)
def test_nw_underflow_fallback(mod):
    X = np.zeros((3, 1))
    y = np.array([1.0, 2.0, 3.0])
    out = mod.nw_predict(X, y, np.array([[1e3]]), 1e-3, 2.0)
    assert out[0] == 2.0


@pytest.mark.parametrize("mod", BACKENDS)
@pytest.mark.parametrize("masked", [False, True])
def test_stump_split_matches_exhaustive_search(mod, masked, data):
    X, y, _ = data
    X, r = X[:45], y[:45]
    w = np.ones(45)
    if masked:
        w[::4] = 0.0
    f, thr, lv, rv, _ = mod.stump_split(X, presort(X), r, w)
    sse, bf, bthr, blv, brv = brute_best_split(X, r, w)
    assert (f, thr) == (bf, bthr)
    assert lv == pytest.approx(blv, abs=1e-12) and rv == pytest.approx(brv, abs=1e-12)


def test_stump_split_backends_bitwise(data):
    X, y, _ = data
    w = (np.arange(60) % 3 != 0).astype(float)
    a = _jit.stump_split(X, presort(X), y, w)
    b = _np.stump_split(X, presort(X), y, w)
    assert tuple(map(float, a)) == tuple(map(float, b))


@pytest.mark.parametrize("mod", BACKENDS)
def test_stump_split_no_candidate(mod):
    X = np.ones((4, 2))
    r = np.array([1.0, 2.0, 3.0, 6.0])
    f, _, lv, rv, _ = mod.stump_split(X, presort(X), r, np.ones(4))
    assert f == -1 and lv == rv == 3.0


def test_boosting_backends_bitwise(data):
    X, y, Q = data
    order = presort(X)
    folds = np.arange(60) % 4
    c1, r1 = _jit.boost_cv(X, order, y, folds, 4, 40, 0.3, 5)
    c2, r2 = _np.boost_cv(X, order, y, folds, 4, 40, 0.3, 5)
    assert r1 == r2
    np.testing.assert_array_equal(c1, c2)
    fit1 = _jit.boost_fit(X, order, y, 12, 0.3)
    fit2 = _np.boost_fit(X, order, y, 12, 0.3)
    for a, b in zip(fit1, fit2):
        np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(_jit.stumps_predict(Q, *fit1, 0.3),
                                  _np.stumps_predict(Q, *fit2, 0.3))


@pytest.mark.parametrize("mtry,min_leaf", [(4, 1), (2, 5), (1, 12)])
def test_tree_backends_bitwise(data, mtry, min_leaf):
    X, y, Q = data
    rng = np.random.default_rng(mtry)
    idx = np.sort(rng.integers(0, 60, 60))
    keys = rng.random((121, 4))
    t1 = _jit.grow_tree(X, y, idx, keys, mtry, min_leaf)
    t2 = _np.grow_tree(X, y, idx, keys, mtry, min_leaf)
    for a, b in zip(t1, t2):
        np.testing.assert_array_equal(a, b)
    pad = [np.stack([a]) for a in t1]
    np.testing.assert_array_equal(_jit.trees_predict(Q, *pad), _np.trees_predict(Q, *pad))


@pytest.mark.parametrize("mod", BACKENDS)
def test_tree_leaves_respect_min_leaf(mod, data):
    X, y, _ = data
    idx = np.arange(60)
    feature, thr, left, right, value = mod.grow_tree(X, y, idx, np.random.default_rng(0)
                                                     .random((121, 4)), 4, 7)
    pad = [np.stack([a]) for a in (feature, thr, left, right, value)]
    leaf_of = mod.trees_predict(X, *pad)[0]
    _, counts = np.unique(leaf_of, return_counts=True)
    assert counts.min() >= 7
    # leaf values are the in-node means
    for v in np.unique(leaf_of):
        assert v == pytest.approx(y[leaf_of == v].mean(), abs=1e-12)
