"""K-fold cross-validation and its oracle decomposition.

For held-out predictions ``f_i`` of a learner and the true mean ``mu``,

    CV   = 1/n sum (y_i - f_i)^2
         = 1/n sum (y_i - mu_i)^2                  (cv_star)
         + 2/n sum (y_i - mu_i)(mu_i - f_i)        (2 z)
         + 1/n sum (mu_i - f_i)^2                  (delta_sq)

Totals are exactly rounded sums (``math.fsum``), so they are independent of
fold grouping and summation order: the learner-free ``cv_star`` comes out
bit-identical for every learner scored on the same data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from cvlab.dgp import Dataset, Dgp
from cvlab.errors import InvalidFoldsError, InvalidInputError, UndefinedOobError
from cvlab.learners.base import FittedRule, Learner
from cvlab.rng import derive_seed, generator

DECOMPOSITION_COLUMNS = ("replication", "learner", "n", "K", "cv_total", "cv_star", "z",
                         "delta_sq")


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    """``fold_of`` holds 1-based labels; ``fold_index`` the same labels 0-based."""

    fold_index: np.ndarray
    K: int

    def __post_init__(self):
        idx = np.asarray(self.fold_index, dtype=np.int64)
        if idx.ndim != 1 or idx.size == 0:
            raise InvalidFoldsError("fold labels must be a nonempty vector")
        if idx.min() < 0 or idx.max() >= self.K:
            raise InvalidFoldsError(f"fold labels must lie in 0..{self.K - 1}")
        idx.setflags(write=False)
        object.__setattr__(self, "fold_index", idx)

    @property
    def n(self) -> int:
        return self.fold_index.shape[0]

    @property
    def fold_of(self) -> np.ndarray:
        return self.fold_index + 1

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.fold_index, minlength=self.K)

    @property
    def n_k(self) -> np.ndarray:
        return self.n - self.sizes

    def members(self, k: int) -> np.ndarray:
        """Indices in fold ``k`` (0-based), ascending."""
        return np.flatnonzero(self.fold_index == k)


def make_folds(n: int, K: int, seed: int) -> FoldAssignment:
    """A seeded random permutation dealt round-robin into K folds."""
    if int(K) != K or int(n) != n or K < 2 or K > n:
        raise InvalidFoldsError(f"need 2 <= K <= n, got K={K}, n={n}")
    perm = generator(seed).permutation(int(n))
    labels = np.empty(int(n), dtype=np.int64)
    labels[perm] = np.arange(int(n)) % int(K)
    return FoldAssignment(labels, int(K))


def fold_seed(seed: int, k: int) -> int:
    return derive_seed(seed, k)


def _check(dataset: Dataset, folds: FoldAssignment):
    if folds.n != dataset.n:
        raise InvalidInputError(
            f"fold assignment covers {folds.n} samples but the dataset has {dataset.n}"
        )


def heldout_predictions(learner: Learner, dataset: Dataset, folds: FoldAssignment,
                        seed: int) -> np.ndarray:
    """Predictions for fold k from the learner refit without fold k."""
    _check(dataset, folds)
    out = np.empty(dataset.n)
    for k in range(folds.K):
        test = folds.members(k)
        train = np.flatnonzero(folds.fold_index != k)
        rule = learner.fit(dataset.subset(train), fold_seed(seed, k))
        out[test] = rule.predict(dataset.features[test])
    return out


def _fold_sums(values: np.ndarray, groups: list[np.ndarray]) -> np.ndarray:
    return np.array([math.fsum(values[g]) for g in groups])


def cross_validate(learner: Learner, dataset: Dataset, folds: FoldAssignment,
                   seed: int = 0) -> float:
    pred = heldout_predictions(learner, dataset, folds, seed)
    r = dataset.responses - pred
    return math.fsum(r * r) / dataset.n


@dataclass(frozen=True)
class CvDecomposition:
    """CV estimate split into learner-free noise, cross term and excess error.

    ``per_fold`` maps each term name to its per-fold contribution (already
    divided by the sample count) plus ``"size"`` for the fold sizes.
    """

    cv_total: float
    cv_star: float
    z: float
    delta_sq: float
    n: int
    K: int
    per_fold: dict[str, np.ndarray] = field(repr=False, compare=False)

    @property
    def identity_residual(self) -> float:
        return self.cv_total - (self.cv_star + 2.0 * self.z + self.delta_sq)

    def as_row(self, replication: int = 0, learner: str = "") -> dict:
        return {
            "replication": replication,
            "learner": learner,
            "n": self.n,
            "K": self.K,
            "cv_total": self.cv_total,
            "cv_star": self.cv_star,
            "z": self.z,
            "delta_sq": self.delta_sq,
        }


def decompose_predictions(y: np.ndarray, mu_x: np.ndarray, pred: np.ndarray,
                          groups: list[np.ndarray], K: int) -> CvDecomposition:
    """Decomposition for arbitrary held-out predictions grouped into folds."""
    used = np.sort(np.concatenate(groups))
    n = int(used.shape[0])
    noise = y - mu_x
    err = mu_x - pred
    r = y - pred
    terms = {"cv_total": r * r, "cv_star": noise * noise, "z": noise * err,
             "delta_sq": err * err}
    # fsum is exactly rounded, so totals do not depend on how rows are grouped
    totals = {key: math.fsum(v[used]) / n for key, v in terms.items()}
    per_fold = {key: _fold_sums(v, groups) / n for key, v in terms.items()}
    per_fold["size"] = np.array([len(g) for g in groups])
    return CvDecomposition(n=n, K=K, per_fold=per_fold, **totals)


def decompose(learner: Learner, dataset: Dataset, folds: FoldAssignment,
              mu: Callable[[np.ndarray], np.ndarray], seed: int = 0) -> CvDecomposition:
    """K-fold CV together with its cv_star, z and delta_sq terms.

    Uses the same per-fold fits as :func:`cross_validate` for the same seed,
    so ``cv_total`` matches it exactly.
    """
    pred = heldout_predictions(learner, dataset, folds, seed)
    groups = [folds.members(k) for k in range(folds.K)]
    mu_x = np.asarray(mu(dataset.features), dtype=np.float64)
    return decompose_predictions(dataset.responses, mu_x, pred, groups, folds.K)


def decompose_oob(rule, dataset: Dataset,
                  mu: Callable[[np.ndarray], np.ndarray]) -> CvDecomposition:
    """Decomposition with out-of-bag predictions in place of fold refits.

    Reported with ``K = 0``; samples that are in bag for every tree are left
    out and the average runs over the rest.
    """
    pred = rule.oob_predictions()
    used = np.flatnonzero(~np.isnan(pred))
    if used.size == 0:
        raise UndefinedOobError("every sample is in bag for every tree")
    mu_x = np.asarray(mu(dataset.features), dtype=np.float64)
    return decompose_predictions(dataset.responses, mu_x, pred, [used], 0)


@dataclass(frozen=True)
class McEstimate:
    value: float
    se: float
    draws: int


def oracle_excess_risk(rule: FittedRule, dgp: Dgp, mc_draws: int, seed: int,
                       chunk: int = 1 << 15) -> McEstimate:
    """Monte Carlo mean of ``(rule(X) - mu(X))^2`` over fresh feature draws."""
    if mc_draws < 1:
        raise InvalidInputError("mc_draws must be >= 1")
    rng = generator(seed)
    s1 = 0.0
    s2 = 0.0
    done = 0
    while done < mc_draws:
        m = min(chunk, mc_draws - done)
        X = dgp.draw_features(rng, m)
        d = rule.predict(X) - dgp.mu(X)
        d2 = d * d
        s1 += math.fsum(d2)
        s2 += math.fsum(d2 * d2)
        done += m
    mean = s1 / mc_draws
    if mc_draws > 1:
        var = max(s2 / mc_draws - mean * mean, 0.0) * mc_draws / (mc_draws - 1)
        se = math.sqrt(var / mc_draws)
    else:
        se = math.inf
    return McEstimate(mean, se, mc_draws)


def write_decomposition_csv(target, rows: list[dict]) -> None:
    """Write rows to a path or an open text stream."""
    if hasattr(target, "write"):
        _write_rows(target, rows)
        return
    with open(target, "w", newline="") as fh:
        _write_rows(fh, rows)


def _write_rows(fh, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(DECOMPOSITION_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in DECOMPOSITION_COLUMNS])


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)
