"""Data-generating processes with a known conditional mean."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from cvlab.errors import InvalidInputError
from cvlab.rng import generator

X_LAWS = ("standard_normal", "uniform")


def mu_rt(x) -> float:
    """``1{x1 > 0} / (1 + exp(-2 x2))`` for a single point."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 2:
        raise InvalidInputError("mu_rt needs a vector of dimension >= 2")
    if not x[0] > 0.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(-2.0 * x[1]))


def _indicator_sigmoid(X: np.ndarray) -> np.ndarray:
    if X.shape[1] < 2:
        raise InvalidInputError("indicator_sigmoid mean needs p >= 2")
    out = np.zeros(X.shape[0])
    on = X[:, 0] > 0.0
    out[on] = 1.0 / (1.0 + np.exp(-2.0 * X[on, 1]))
    return out


def _zero(X: np.ndarray) -> np.ndarray:
    return np.zeros(X.shape[0])


def _linear(X: np.ndarray) -> np.ndarray:
    return X[:, 0].copy()


MU_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "indicator_sigmoid": _indicator_sigmoid,
    "zero": _zero,
    "linear": _linear,
}
_MIN_P = {"indicator_sigmoid": 2, "zero": 1, "linear": 1}


@dataclass(frozen=True)
class Dgp:
    """X from ``x_law``, ``Y | X ~ N(mu(X), noise_sd^2)``.

    ``mu_name`` selects a registered mean function so instances stay hashable
    and picklable; ``mu`` evaluates it row-wise on an ``(m, p)`` array.
    """

    p: int = 10
    mu_name: str = "indicator_sigmoid"
    noise_sd: float = 1.0
    x_law: str = "standard_normal"

    def __post_init__(self):
        if self.mu_name not in MU_FUNCTIONS:
            raise InvalidInputError(
                f"unknown mean function {self.mu_name!r}; "
                f"choose from {sorted(MU_FUNCTIONS)}"
            )
        if int(self.p) != self.p or self.p < _MIN_P[self.mu_name]:
            raise InvalidInputError(
                f"p={self.p} invalid for mean {self.mu_name!r}"
            )
        if not (self.noise_sd >= 0.0 and math.isfinite(self.noise_sd)):
            raise InvalidInputError("noise_sd must be finite and >= 0")
        if self.x_law not in X_LAWS:
            raise InvalidInputError(f"unknown feature law {self.x_law!r}")

    def mu(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.p:
            raise InvalidInputError(f"expected {self.p} features, got {X.shape[1]}")
        return MU_FUNCTIONS[self.mu_name](X)

    @property
    def omega(self) -> float:
        """Bound on Var[Y | X]; exact here since the noise is homoskedastic."""
        return self.noise_sd**2

    def draw_features(self, rng: np.random.Generator, m: int) -> np.ndarray:
        if self.x_law == "standard_normal":
            return rng.standard_normal((m, self.p))
        return rng.uniform(-1.0, 1.0, size=(m, self.p))


def reference_dgp() -> Dgp:
    """The ten-dimensional indicator-sigmoid design with unit noise."""
    return Dgp(p=10, mu_name="indicator_sigmoid", noise_sd=1.0)


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    responses: np.ndarray

    def __post_init__(self):
        X = np.ascontiguousarray(self.features, dtype=np.float64)
        y = np.ascontiguousarray(self.responses, dtype=np.float64)
        if X.ndim != 2 or y.ndim != 1:
            raise InvalidInputError("features must be 2-D and responses 1-D")
        if X.shape[0] != y.shape[0] or y.shape[0] < 1:
            raise InvalidInputError(
                f"need matching, nonzero row counts; got {X.shape[0]} and {y.shape[0]}"
            )
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "responses", y)

    @property
    def n(self) -> int:
        return self.responses.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.features[idx], self.responses[idx])

    def with_responses(self, y) -> "Dataset":
        return Dataset(self.features, y)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.features, other.features) and np.array_equal(
            self.responses, other.responses
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"x{j + 1}" for j in range(self.p)] + ["y"])
            for row, y in zip(self.features, self.responses):
                w.writerow([repr(float(v)) for v in row] + [repr(float(y))])

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        path = Path(path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise InvalidInputError(f"{path}: empty file")
        header = [h.strip() for h in rows[0]]
        p = len(header) - 1
        expected = [f"x{j + 1}" for j in range(p)] + ["y"]
        if p < 1 or header != expected:
            raise InvalidInputError(
                f"{path}:1: header must be x1,...,xp,y; got {','.join(header)}"
            )
        body = [r for r in rows[1:] if r]
        if not body:
            raise InvalidInputError(f"{path}: no data rows")
        data = np.empty((len(body), p + 1))
        for i, r in enumerate(body):
            if len(r) != p + 1:
                raise InvalidInputError(
                    f"{path}:{i + 2}: expected {p + 1} fields, got {len(r)}"
                )
            try:
                data[i] = [float(v) for v in r]
            except ValueError as exc:
                raise InvalidInputError(f"{path}:{i + 2}: {exc}") from None
        return cls(data[:, :p], data[:, p])


def sample_dataset(dgp: Dgp, n: int, seed: int) -> Dataset:
    """n i.i.d. draws; a pure function of ``(dgp, n, seed)``."""
    if int(n) != n or n < 1:
        raise InvalidInputError(f"n must be a positive integer, got {n}")
    rng = generator(seed)
    X = dgp.draw_features(rng, int(n))
    eps = rng.standard_normal(int(n))
    y = dgp.mu(X) + dgp.noise_sd * eps
    return Dataset(X, y)


def true_err(dgp: Dgp) -> float:
    """E[(Y - mu(X))^2], the noise variance."""
    return dgp.noise_sd**2


def cv_star_asymptotic_variance(dgp: Dgp) -> float:
    # Var of sigma^2 * chi^2_1
    return 2.0 * dgp.noise_sd**4
