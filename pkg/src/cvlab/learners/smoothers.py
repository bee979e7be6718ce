"""Nearest-neighbour and Nadaraya-Watson regression."""

from __future__ import annotations

from typing import Callable

import numpy as np

from cvlab import kernels
from cvlab.errors import InvalidInputError
from cvlab.learners.base import FittedRule, Learner


class KnnRule(FittedRule):
    def __init__(self, X, y, k):
        self.X, self.y, self.k = X, y, k
        self.training_n, self.p = X.shape

    def _predict(self, X):
        return kernels.knn_predict(self.X, self.y, X, self.k)


class KnnLearner(Learner):
    """Mean response of the ``k_rule(n)`` nearest training points.

    Distance ties go to the lower training index.
    """

    def __init__(self, k_rule: Callable[[int], int], name: str = "knn"):
        self.k_rule = k_rule
        self.name = name

    def fit(self, dataset, seed=0):
        if dataset is None or dataset.n < 1:
            raise InvalidInputError("knn needs a nonempty dataset")
        k = self.k_rule(dataset.n)
        if int(k) != k or not 1 <= k <= dataset.n:
            raise InvalidInputError(f"k={k} outside [1, n={dataset.n}]")
        return KnnRule(dataset.features, dataset.responses, int(k))


class KernelRule(FittedRule):
    def __init__(self, X, y, h):
        self.X, self.y, self.h = X, y, h
        self.training_n, self.p = X.shape
        self.global_mean = float(np.mean(y))

    def _predict(self, X):
        return kernels.nw_predict(self.X, self.y, X, self.h, self.global_mean)


class KernelLearner(Learner):
    """Gaussian-kernel Nadaraya-Watson smoother with bandwidth ``bandwidth_rule(n)``.

    Falls back to the global training mean where every weight underflows.
    """

    def __init__(self, bandwidth_rule: Callable[[int], float], name: str = "kernel"):
        self.bandwidth_rule = bandwidth_rule
        self.name = name

    def fit(self, dataset, seed=0):
        h = float(self.bandwidth_rule(dataset.n))
        if not h > 0:
            raise InvalidInputError(f"bandwidth must be positive, got {h}")
        return KernelRule(dataset.features, dataset.responses, h)
