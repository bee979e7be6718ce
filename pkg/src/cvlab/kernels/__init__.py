"""Hot numeric kernels.

The numba implementations live in ``_jit`` and the vectorized numpy ones in
``_np``; the names exported here point at whichever backend
:mod:`cvlab._accel` selected.
"""

from cvlab._accel import BACKEND, USE_NUMBA
from cvlab.kernels import _np

if USE_NUMBA:
    from cvlab.kernels import _jit as _impl
else:
    _impl = _np

knn_predict = _impl.knn_predict
nw_predict = _impl.nw_predict
stump_split = _impl.stump_split
boost_cv = _impl.boost_cv
boost_fit = _impl.boost_fit
stumps_predict = _impl.stumps_predict
grow_tree = _impl.grow_tree
trees_predict = _impl.trees_predict

__all__ = [
    "BACKEND",
    "boost_cv",
    "boost_fit",
    "grow_tree",
    "knn_predict",
    "nw_predict",
    "stump_split",
    "stumps_predict",
    "trees_predict",
]
