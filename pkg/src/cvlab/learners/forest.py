from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cvlab import kernels
from cvlab.errors import InvalidConfigError, InvalidInputError, UndefinedOobError
from cvlab.learners.base import FittedRule, Learner
from cvlab.rng import generator

_CHUNK = 8192


class ForestRule(FittedRule):
    """Average of regression trees stored as padded node tables."""

    def __init__(self, trees, inbag, training):
        T = len(trees)
        width = max(t[0].shape[0] for t in trees)
        self.feature = np.full((T, width), -1, np.int64)
        self.threshold = np.zeros((T, width))
        self.left = np.full((T, width), -1, np.int64)
        self.right = np.full((T, width), -1, np.int64)
        self.value = np.zeros((T, width))
        for t, (f, thr, lft, rgt, val) in enumerate(trees):
            k = f.shape[0]
            self.feature[t, :k] = f
            self.threshold[t, :k] = thr
            self.left[t, :k] = lft
            self.right[t, :k] = rgt
            self.value[t, :k] = val
        self.inbag = inbag  # (num_trees, n) bool
        self.training = training
        self.training_n = training.n
        self.p = training.p

    @property
    def num_trees(self) -> int:
        return self.feature.shape[0]

    def tree_predictions(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return kernels.trees_predict(
            X, self.feature, self.threshold, self.left, self.right, self.value
        )

    def _predict(self, X):
        out = np.empty(X.shape[0])
        for lo in range(0, X.shape[0], _CHUNK):
            out[lo:lo + _CHUNK] = self.tree_predictions(X[lo:lo + _CHUNK]).mean(axis=0)
        return out

    def oob_predictions(self) -> np.ndarray:
        """Per-sample mean over trees not holding the sample in bag (NaN if none)."""
        preds = self.tree_predictions(self.training.features)
        out_bag = ~self.inbag
        counts = out_bag.sum(axis=0)
        sums = np.where(out_bag, preds, 0.0).sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


@dataclass(frozen=True)
class OobEstimate:
    error: float
    n_used: int
    n_skipped: int


def oob_error(rule: ForestRule, dataset) -> OobEstimate:
    """Out-of-bag squared error; rows in bag for every tree are skipped."""
    if not isinstance(rule, ForestRule):
        raise InvalidInputError("oob_error needs a rule fitted by ForestLearner")
    if rule.training is not dataset and rule.training != dataset:
        raise InvalidInputError("rule was not fitted on this dataset")
    pred = rule.oob_predictions()
    used = ~np.isnan(pred)
    if not used.any():
        raise UndefinedOobError("every sample is in bag for every tree")
    r = dataset.responses[used] - pred[used]
    return OobEstimate(float(np.mean(r * r)), int(used.sum()), int((~used).sum()))


class ForestLearner(Learner):
    """Bagged CART regression trees.

    Each tree sees ``round(subsample * n)`` rows, drawn without replacement by
    default or with replacement when ``bootstrap`` is set, and tries ``mtry``
    random coordinates per node. Tree ``t`` draws from the substream
    ``(seed, t)``, so trees are independent of fitting order.
    """

    def __init__(self, num_trees: int = 200, min_leaf: int = 5, subsample: float = 0.5,
                 mtry: int | None = None, bootstrap: bool = False, name: str = "forest"):
        if num_trees < 1:
            raise InvalidConfigError("num_trees must be >= 1")
        if min_leaf < 1:
            raise InvalidConfigError("min_leaf must be >= 1")
        if not 0.0 < subsample <= 1.0:
            raise InvalidConfigError("subsample must lie in (0, 1]")
        if mtry is not None and mtry < 1:
            raise InvalidConfigError("mtry must be >= 1")
        self.num_trees = int(num_trees)
        self.min_leaf = int(min_leaf)
        self.subsample = float(subsample)
        self.mtry = mtry
        self.bootstrap = bool(bootstrap)
        self.name = name

    def fit(self, dataset, seed=0):
        n, p = dataset.n, dataset.p
        mtry = p if self.mtry is None else self.mtry
        if mtry > p:
            raise InvalidConfigError(f"mtry={mtry} exceeds p={p}")
        size = max(1, int(math.floor(self.subsample * n + 0.5)))
        X, y = dataset.features, dataset.responses
        trees = []
        inbag = np.zeros((self.num_trees, n), dtype=bool)
        for t in range(self.num_trees):
            rng = generator(seed, t)
            if self.bootstrap:
                idx = np.sort(rng.integers(0, n, size))
            else:
                idx = np.sort(rng.choice(n, size, replace=False))
            keys = rng.random((2 * size + 1, p))
            trees.append(kernels.grow_tree(X, y, idx.astype(np.int64), keys, mtry,
                                           self.min_leaf))
            inbag[t, idx] = True
        return ForestRule(trees, inbag, dataset)
