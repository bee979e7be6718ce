from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cvlab.dgp import Dataset
from cvlab.errors import InvalidInputError, InvalidRateError


@dataclass(frozen=True)
class DeclaredRate:
    """Constants of the excess-risk band ``C- <= n^gamma * RMSE <= C+``."""

    gamma: float
    c_minus: float
    c_plus: float

    def __post_init__(self):
        if not 0.25 < self.gamma < 0.5:
            raise InvalidRateError(f"gamma={self.gamma} outside (0.25, 0.5)")
        if not (0.0 < self.c_minus <= self.c_plus < math.inf):
            raise InvalidRateError(
                f"need 0 < C- <= C+ < inf, got ({self.c_minus}, {self.c_plus})"
            )


def as_rows(X) -> tuple[np.ndarray, bool]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        return X[None, :], True
    if X.ndim != 2:
        raise InvalidInputError("predict expects a vector or an (m, p) matrix")
    return np.ascontiguousarray(X), False


class FittedRule:
    """A fitted predictor. Subclasses implement ``_predict`` on 2-D input."""

    training_n: int
    p: int

    def predict(self, X):
        """Predict for one point (returns a float) or an ``(m, p)`` batch."""
        rows, single = as_rows(X)
        if rows.shape[1] != self.p:
            raise InvalidInputError(f"expected {self.p} features, got {rows.shape[1]}")
        out = self._predict(rows)
        return float(out[0]) if single else out

    def _predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Learner:
    """An algorithm mapping a dataset and a seed to a :class:`FittedRule`."""

    name: str = "learner"
    declared_rate: DeclaredRate | None = None

    def fit(self, dataset: Dataset, seed: int = 0) -> FittedRule:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r})"


class ConstantRule(FittedRule):
    def __init__(self, value: float, training_n: int, p: int):
        self.value = float(value)
        self.training_n = training_n
        self.p = p

    def _predict(self, X):
        return np.full(X.shape[0], self.value)


class ConstantLearner(Learner):
    """Predicts a fixed value, ignoring the data."""

    def __init__(self, value: float = 0.0, name: str = "constant"):
        self.value = float(value)
        self.name = name

    def fit(self, dataset, seed=0):
        return ConstantRule(self.value, dataset.n, dataset.p)


@dataclass(frozen=True)
class PowerRule:
    """``n -> scale * n**exponent``, optionally rounded to an integer in [1, n]."""

    scale: float
    exponent: float = 0.0
    integer: bool = False

    def __call__(self, n: int):
        v = self.scale * float(n) ** self.exponent
        if self.integer:
            return int(min(max(1, round(v)), n))
        return v
