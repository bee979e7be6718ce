from cvlab.learners.base import (
    ConstantLearner,
    DeclaredRate,
    FittedRule,
    Learner,
    PowerRule,
)
from cvlab.learners.boosting import BoostedStumpsLearner, StumpEnsemble
from cvlab.learners.forest import ForestLearner, ForestRule, OobEstimate, oob_error
from cvlab.learners.smoothers import KernelLearner, KnnLearner
from cvlab.learners.specs import LearnerSpec
from cvlab.learners.synthetic import SyntheticLearner

__all__ = [
    "BoostedStumpsLearner",
    "ConstantLearner",
    "DeclaredRate",
    "FittedRule",
    "ForestLearner",
    "ForestRule",
    "KernelLearner",
    "KnnLearner",
    "Learner",
    "LearnerSpec",
    "OobEstimate",
    "PowerRule",
    "StumpEnsemble",
    "SyntheticLearner",
    "oob_error",
]


def synthetic_learner(gamma, c, dgp):
    return SyntheticLearner(gamma, c, dgp)


def knn_learner(k_rule):
    return KnnLearner(k_rule)


def kernel_learner(bandwidth_rule):
    return KernelLearner(bandwidth_rule)


def boosted_stumps_learner(max_rounds=1000, learning_rate=0.3, internal_cv_folds=5,
                           patience=10):
    return BoostedStumpsLearner(max_rounds, learning_rate, internal_cv_folds, patience)


def forest_learner(num_trees=200, min_leaf=5, subsample=0.5, mtry=None, bootstrap=False):
    return ForestLearner(num_trees, min_leaf, subsample, mtry, bootstrap)
