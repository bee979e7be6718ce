"""Backend selection for the hot kernels.

Set ``CVLAB_DISABLE_NUMBA=1`` to force the pure-numpy path. The flag is read
once at import time; numba being absent has the same effect.
"""

import os

_FLAG = os.environ.get("CVLAB_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG in {"1", "true", "yes", "on"}

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba ships with the default install
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not DISABLED_BY_ENV
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, otherwise a no-op decorator."""
    if HAS_NUMBA:
        from numba import njit as _njit

        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
