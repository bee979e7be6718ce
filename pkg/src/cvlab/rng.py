"""Seed derivation.

Every random quantity in the package comes from a PCG64 stream whose seed
sequence is ``SeedSequence(master, spawn_key=key)``. A substream is therefore
a pure function of the master seed and an integer key path, e.g.
``(replication, n_index)``, which keeps results independent of scheduling and
worker count.
"""

from __future__ import annotations

import numpy as np

# key tags for the streams used inside one Monte Carlo cell
DATA = 0
FOLDS = 1
FIT = 2
FULL_FIT = 3
ORACLE = 4


def _sequence(seed: int, key: tuple[int, ...]) -> np.random.SeedSequence:
    if seed < 0 or any(k < 0 for k in key):
        raise ValueError("seeds and keys must be non-negative integers")
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))


def derive_seed(seed: int, *key: int) -> int:
    """A 63-bit child seed for ``key`` under ``seed``."""
    state = _sequence(seed, key).generate_state(1, np.uint64)[0]
    return int(state >> np.uint64(1))


def generator(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(_sequence(seed, key)))
