"""Learner configuration blocks: a name, a kind, and a hyperparameter table.

Schema (``kind`` -> accepted keys, defaults in parentheses)::

    constant        value (0.0)
    synthetic       gamma, c (1.0)
    knn             k | k_scale (1.0) + k_exponent (0.5)
    kernel          bandwidth | bandwidth_scale (1.0) + bandwidth_exponent (-0.2)
    boosted_stumps  max_rounds (1000), learning_rate (0.3),
                    internal_cv_folds (5), patience (10)
    forest          num_trees (200), min_leaf (5), subsample (0.5),
                    mtry (p), bootstrap (false)

Every block may also set ``evaluation = "kfold"`` (default) or, for forests
only, ``evaluation = "oob"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from cvlab.dgp import Dgp
from cvlab.errors import InvalidConfigError
from cvlab.learners.base import ConstantLearner, Learner, PowerRule
from cvlab.learners.boosting import BoostedStumpsLearner
from cvlab.learners.forest import ForestLearner
from cvlab.learners.smoothers import KernelLearner, KnnLearner
from cvlab.learners.synthetic import SyntheticLearner

KIND_KEYS: dict[str, set[str]] = {
    "constant": {"value"},
    "synthetic": {"gamma", "c"},
    "knn": {"k", "k_scale", "k_exponent"},
    "kernel": {"bandwidth", "bandwidth_scale", "bandwidth_exponent"},
    "boosted_stumps": {"max_rounds", "learning_rate", "internal_cv_folds", "patience"},
    "forest": {"num_trees", "min_leaf", "subsample", "mtry", "bootstrap"},
}
EVALUATIONS = ("kfold", "oob")


@dataclass(frozen=True)
class LearnerSpec:
    name: str
    kind: str
    params: dict[str, Any] = field(default_factory=dict, hash=False)
    evaluation: str = "kfold"

    def __post_init__(self):
        if self.kind not in KIND_KEYS:
            raise InvalidConfigError(
                f"learner {self.name!r}: unknown kind {self.kind!r}; "
                f"choose from {sorted(KIND_KEYS)}"
            )
        extra = set(self.params) - KIND_KEYS[self.kind]
        if extra:
            raise InvalidConfigError(
                f"learner {self.name!r}: unknown keys {sorted(extra)} for kind {self.kind!r}"
            )
        if self.evaluation not in EVALUATIONS:
            raise InvalidConfigError(
                f"learner {self.name!r}: evaluation must be one of {EVALUATIONS}"
            )
        if self.evaluation == "oob" and self.kind != "forest":
            raise InvalidConfigError(f"learner {self.name!r}: oob evaluation needs a forest")
        if self.kind == "synthetic" and "gamma" not in self.params:
            raise InvalidConfigError(f"learner {self.name!r}: synthetic needs gamma")

    @classmethod
    def from_dict(cls, block: dict[str, Any]) -> "LearnerSpec":
        block = dict(block)
        try:
            name = str(block.pop("name"))
            kind = str(block.pop("kind"))
        except KeyError as exc:
            raise InvalidConfigError(f"learner block missing {exc.args[0]!r}") from None
        evaluation = str(block.pop("evaluation", "kfold"))
        return cls(name, kind, block, evaluation)

    def to_dict(self) -> dict[str, Any]:
        out = {"name": self.name, "kind": self.kind, "evaluation": self.evaluation}
        out.update(sorted(self.params.items()))
        return out

    def build(self, dgp: Dgp | None = None) -> Learner:
        q = self.params
        try:
            if self.kind == "constant":
                return ConstantLearner(float(q.get("value", 0.0)), name=self.name)
            if self.kind == "synthetic":
                if dgp is None:
                    raise InvalidConfigError("synthetic learner needs a dgp")
                return SyntheticLearner(float(q["gamma"]), float(q.get("c", 1.0)), dgp,
                                        name=self.name)
            if self.kind == "knn":
                rule = (PowerRule(int(q["k"]), 0.0, integer=True) if "k" in q
                        else PowerRule(float(q.get("k_scale", 1.0)),
                                       float(q.get("k_exponent", 0.5)), integer=True))
                return KnnLearner(rule, name=self.name)
            if self.kind == "kernel":
                rule = (PowerRule(float(q["bandwidth"])) if "bandwidth" in q
                        else PowerRule(float(q.get("bandwidth_scale", 1.0)),
                                       float(q.get("bandwidth_exponent", -0.2))))
                return KernelLearner(rule, name=self.name)
            if self.kind == "boosted_stumps":
                return BoostedStumpsLearner(
                    max_rounds=int(q.get("max_rounds", 1000)),
                    learning_rate=float(q.get("learning_rate", 0.3)),
                    internal_cv_folds=int(q.get("internal_cv_folds", 5)),
                    patience=int(q.get("patience", 10)),
                    name=self.name,
                )
            mtry = q.get("mtry")
            return ForestLearner(
                num_trees=int(q.get("num_trees", 200)),
                min_leaf=int(q.get("min_leaf", 5)),
                subsample=float(q.get("subsample", 0.5)),
                mtry=None if mtry is None else int(mtry),
                bootstrap=bool(q.get("bootstrap", False)),
                name=self.name,
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidConfigError):
                raise
            raise InvalidConfigError(f"learner {self.name!r}: {exc}") from None
