from __future__ import annotations

import numpy as np

from cvlab import kernels
from cvlab.errors import InvalidConfigError
from cvlab.learners.base import FittedRule, Learner
from cvlab.rng import derive_seed


def presort(X: np.ndarray) -> np.ndarray:
    """Row order of each column, shape ``(p, n)``; ties keep index order."""
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.int64))


class StumpEnsemble(FittedRule):
    def __init__(self, base, feats, thrs, lefts, rights, learning_rate, training_n, p,
                 cv_curve=None):
        self.base = float(base)
        self.feats = feats
        self.thrs = thrs
        self.lefts = lefts
        self.rights = rights
        self.learning_rate = learning_rate
        self.training_n = training_n
        self.p = p
        self.cv_curve = cv_curve

    @property
    def rounds(self) -> int:
        return int(self.feats.shape[0])

    def _predict(self, X):
        return kernels.stumps_predict(
            X, self.base, self.feats, self.thrs, self.lefts, self.rights,
            self.learning_rate,
        )


class BoostedStumpsLearner(Learner):
    """Least-squares gradient boosting with depth-one trees.

    The number of rounds is picked by ``internal_cv_folds``-fold CV run in
    lock step across folds, stopping once the fold-averaged validation error
    has not improved for ``patience`` rounds. The final model is refit on all
    rows with the selected round count. Boosting starts from the training mean.
    """

    def __init__(self, max_rounds: int = 1000, learning_rate: float = 0.3,
                 internal_cv_folds: int = 5, patience: int = 10,
                 name: str = "boosted_stumps"):
        if max_rounds < 1:
            raise InvalidConfigError("max_rounds must be >= 1")
        if not 0.0 < learning_rate <= 1.0:
            raise InvalidConfigError("learning_rate must lie in (0, 1]")
        if internal_cv_folds < 2 and internal_cv_folds != 0:
            raise InvalidConfigError("internal_cv_folds must be 0 (off) or >= 2")
        if patience < 1:
            raise InvalidConfigError("patience must be >= 1")
        self.max_rounds = int(max_rounds)
        self.learning_rate = float(learning_rate)
        self.internal_cv_folds = int(internal_cv_folds)
        self.patience = int(patience)
        self.name = name

    def fit(self, dataset, seed=0):
        from cvlab.crossval import make_folds

        X, y = dataset.features, dataset.responses
        order = presort(X)
        curve = None
        rounds = self.max_rounds
        if self.internal_cv_folds:
            if dataset.n < self.internal_cv_folds:
                raise InvalidConfigError(
                    f"{dataset.n} samples cannot fill {self.internal_cv_folds} internal folds"
                )
            folds = make_folds(dataset.n, self.internal_cv_folds, derive_seed(seed, 0))
            curve, rounds = kernels.boost_cv(
                X, order, y, folds.fold_index, self.internal_cv_folds,
                self.max_rounds, self.learning_rate, self.patience,
            )
        base, feats, thrs, lefts, rights = kernels.boost_fit(
            X, order, y, int(rounds), self.learning_rate
        )
        return StumpEnsemble(base, feats, thrs, lefts, rights, self.learning_rate,
                             dataset.n, dataset.p, cv_curve=curve)
