from __future__ import annotations

import numpy as np

from cvlab.dgp import Dgp
from cvlab.errors import InvalidRateError, UnsupportedLawError
from cvlab.learners.base import DeclaredRate, FittedRule, Learner
from cvlab.rng import generator


class SyntheticRule(FittedRule):
    def __init__(self, dgp: Dgp, direction: np.ndarray, amplitude: float, training_n: int):
        self.dgp = dgp
        self.direction = direction
        self.amplitude = amplitude
        self.training_n = training_n
        self.p = dgp.p

    def _predict(self, X):
        return self.dgp.mu(X) + self.amplitude * (X * self.direction).sum(axis=1)

    @property
    def excess_risk(self) -> float:
        """Exact conditional excess risk under standard normal features."""
        return self.amplitude**2


class SyntheticLearner(Learner):
    """Oracle mean plus a random linear perturbation of size ``c * n**-gamma``.

    With a unit direction ``u`` and ``X ~ N(0, I)``, ``E[(u.X)^2] = 1``, so the
    excess risk is exactly ``c^2 n^(-2 gamma)`` for every fit. Training
    responses are ignored; only ``n`` and the seed enter.
    """

    def __init__(self, gamma: float, c: float, dgp: Dgp, name: str | None = None):
        if c < 0:
            raise ValueError("c must be >= 0")
        if dgp.x_law != "standard_normal":
            raise UnsupportedLawError(
                f"synthetic learner needs standard normal features, not {dgp.x_law!r}"
            )
        self.gamma = float(gamma)
        self.c = float(c)
        self.dgp = dgp
        self.name = name or f"synthetic(gamma={gamma:g},c={c:g})"
        if not 0.25 < self.gamma < 0.5:
            raise InvalidRateError(f"gamma={gamma} outside (0.25, 0.5)")
        # c == 0 is the oracle itself and has no rate band
        self.declared_rate = DeclaredRate(self.gamma, self.c, self.c) if self.c > 0 else None

    def fit(self, dataset, seed=0):
        z = generator(seed).standard_normal(self.dgp.p)
        u = z / np.linalg.norm(z)
        amp = self.c * float(dataset.n) ** (-self.gamma)
        return SyntheticRule(self.dgp, u, amp, dataset.n)
