"""Time the numba kernels against their numpy twins on fig1-sized inputs.

    python3 benchmarks/bench_kernels.py [--n 1600] [--repeat 3]

For every kernel the script checks that both backends return the same
answer (bitwise for the stump and tree kernels, to 1e-12 for the
smoothers), then prints the best-of-``repeat`` wall time of each and the
speedup. The numba column excludes compilation; a warm-up call runs first.
"""

import argparse
import time

import numpy as np

from cvlab.crossval import make_folds
from cvlab.dgp import reference_dgp, sample_dataset
from cvlab.kernels import _jit, _np
from cvlab.learners.boosting import presort


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def _same(a, b, tol):
    if isinstance(a, tuple):
        return all(_same(x, y, tol) for x, y in zip(a, b))
    if isinstance(a, list):
        return len(a) == len(b) and all(_same(x, y, tol) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if tol == 0:
        return a.shape == b.shape and np.array_equal(a, b, equal_nan=True)
    return a.shape == b.shape and np.allclose(a, b, rtol=tol, atol=tol, equal_nan=True)


def cases(n):
    dgp = reference_dgp()
    data = sample_dataset(dgp, n, 1)
    probe = sample_dataset(dgp, 2000, 2).features
    X, y = data.features, data.responses
    order = presort(X)
    folds = make_folds(n, 5, 3).fold_index
    rng = np.random.default_rng(4)
    size = n // 2
    trees_in = []
    for _ in range(20):
        idx = np.sort(rng.choice(n, size, replace=False)).astype(np.int64)
        trees_in.append((idx, rng.random((2 * size + 1, dgp.p))))

    def forest(mod):
        return [mod.grow_tree(X, y, idx, keys, 3, 5) for idx, keys in trees_in]

    return [
        ("knn_predict k=40", 1e-12, lambda m: m.knn_predict(X, y, probe, 40)),
        ("nw_predict h=1.5", 1e-12, lambda m: m.nw_predict(X, y, probe, 1.5, 0.0)),
        ("stump_split", 0, lambda m: m.stump_split(X, order, y - y.mean(), np.ones(n))),
        ("boost_cv 5 folds", 0,
         lambda m: m.boost_cv(X, order, y, folds, 5, 300, 0.1, 10)),
        ("boost_fit 200 rounds", 0, lambda m: m.boost_fit(X, order, y, 200, 0.1)),
        ("grow_tree x20", 0, forest),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1600)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<22}{'numpy s':>10}{'numba s':>10}{'speedup':>9}  agree")
    failures = 0
    for name, tol, call in cases(args.n):
        call(_jit)  # compile / load from cache
        t_np, out_np = best_of(lambda: call(_np), args.repeat)
        t_jit, out_jit = best_of(lambda: call(_jit), args.repeat)
        ok = _same(out_np, out_jit, tol)
        failures += not ok
        print(f"{name:<22}{t_np:>10.4f}{t_jit:>10.4f}{t_np / t_jit:>8.1f}x  "
              f"{'yes' if ok else 'NO'}")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
