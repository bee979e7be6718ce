"""K-fold cross-validation laboratory with oracle error decomposition."""

from cvlab.crossval import (
    CvDecomposition,
    FoldAssignment,
    cross_validate,
    decompose,
    decompose_oob,
    make_folds,
    oracle_excess_risk,
)
from cvlab.dgp import Dataset, Dgp, mu_rt, reference_dgp, sample_dataset
from cvlab.errors import CvlabError

__version__ = "0.1.0"

__all__ = [
    "CvDecomposition",
    "CvlabError",
    "Dataset",
    "Dgp",
    "FoldAssignment",
    "cross_validate",
    "decompose",
    "decompose_oob",
    "make_folds",
    "mu_rt",
    "oracle_excess_risk",
    "reference_dgp",
    "sample_dataset",
]
