"""Loop kernels compiled with numba.

Each function mirrors one in ``_np.py`` argument for argument. Summation
orders match the numpy versions (sequential, index order) so the two
backends agree to the last bit on the stump and tree kernels.
"""

import numpy as np

from cvlab._accel import njit


@njit(cache=True)
def knn_predict(Xtr, ytr, Xq, k):
    n, p = Xtr.shape
    m = Xq.shape[0]
    out = np.empty(m)
    d = np.empty(n)
    for q in range(m):
        for i in range(n):
            s = 0.0
            for j in range(p):
                t = Xq[q, j] - Xtr[i, j]
                s += t * t
            d[i] = s
        nearest = np.argsort(d, kind="mergesort")[:k]
        acc = 0.0
        for i in nearest:
            acc += ytr[i]
        out[q] = acc / k
    return out


@njit(cache=True)
def nw_predict(Xtr, ytr, Xq, h, fallback):
    n, p = Xtr.shape
    m = Xq.shape[0]
    out = np.empty(m)
    scale = 1.0 / (2.0 * h * h)
    for q in range(m):
        num = 0.0
        den = 0.0
        for i in range(n):
            s = 0.0
            for j in range(p):
                t = Xq[q, j] - Xtr[i, j]
                s += t * t
            w = np.exp(-s * scale)
            num += w * ytr[i]
            den += w
        out[q] = num / den if den > 0.0 else fallback
    return out


@njit(cache=True)
def stump_split(X, order, r, w):
    """Best least-squares stump on the rows with ``w > 0``.

    Returns ``(feature, threshold, left_value, right_value, gain)``; feature is
    -1 when every weighted row shares one value on every coordinate.
    """
    n, p = X.shape
    s_tot = 0.0
    n_tot = 0
    for i in range(n):
        if w[i] > 0.0:
            s_tot += r[i]
            n_tot += 1
    best_gain = -np.inf
    best_f = -1
    best_thr = 0.0
    best_l = 0.0
    best_r = 0.0
    for f in range(p):
        s = 0.0
        c = 0
        last = 0.0
        for pos in range(n):
            i = order[f, pos]
            if w[i] <= 0.0:
                continue
            v = X[i, f]
            if c > 0 and v > last:
                sr = s_tot - s
                cr = n_tot - c
                gain = s * s / c + sr * sr / cr
                if gain > best_gain:
                    best_gain = gain
                    best_f = f
                    best_thr = (last + v) * 0.5
                    best_l = s / c
                    best_r = sr / cr
            s += r[i]
            c += 1
            last = v
    if best_f < 0:
        mean = s_tot / n_tot if n_tot > 0 else 0.0
        return -1, 0.0, mean, mean, 0.0
    return best_f, best_thr, best_l, best_r, best_gain


@njit(cache=True)
def _apply_stump(X, F, f, thr, lv, rv, lr):
    n = X.shape[0]
    if f < 0:
        for i in range(n):
            F[i] += lr * lv
        return
    for i in range(n):
        if X[i, f] <= thr:
            F[i] += lr * lv
        else:
            F[i] += lr * rv


@njit(cache=True)
def boost_cv(X, order, y, fold_of, n_folds, max_rounds, lr, patience):
    """Lock-step boosting on every internal fold.

    Returns the fold-averaged validation MSE per round (NaN past the early
    stop) and the best round count.
    """
    n = X.shape[0]
    F = np.empty((n_folds, n))
    r = np.empty(n)
    w = np.empty(n)
    curve = np.full(max_rounds, np.nan)
    for k in range(n_folds):
        s = 0.0
        c = 0
        for i in range(n):
            if fold_of[i] != k:
                s += y[i]
                c += 1
        base = s / c
        for i in range(n):
            F[k, i] = base
    best = np.inf
    best_t = 0
    for t in range(max_rounds):
        total = 0.0
        for k in range(n_folds):
            for i in range(n):
                r[i] = y[i] - F[k, i]
                w[i] = 1.0 if fold_of[i] != k else 0.0
            f, thr, lv, rv, _ = stump_split(X, order, r, w)
            _apply_stump(X, F[k], f, thr, lv, rv, lr)
            sse = 0.0
            c = 0
            for i in range(n):
                if fold_of[i] == k:
                    e = y[i] - F[k, i]
                    sse += e * e
                    c += 1
            total += sse / c
        curve[t] = total / n_folds
        if curve[t] < best:
            best = curve[t]
            best_t = t
        elif t - best_t >= patience:
            break
    return curve, best_t + 1


@njit(cache=True)
def boost_fit(X, order, y, rounds, lr):
    n = X.shape[0]
    s = 0.0
    for i in range(n):
        s += y[i]
    base = s / n
    F = np.full(n, base)
    r = np.empty(n)
    w = np.ones(n)
    feats = np.empty(rounds, np.int64)
    thrs = np.empty(rounds)
    lefts = np.empty(rounds)
    rights = np.empty(rounds)
    for t in range(rounds):
        for i in range(n):
            r[i] = y[i] - F[i]
        f, thr, lv, rv, _ = stump_split(X, order, r, w)
        feats[t] = f
        thrs[t] = thr
        lefts[t] = lv
        rights[t] = rv
        _apply_stump(X, F, f, thr, lv, rv, lr)
    return base, feats, thrs, lefts, rights


@njit(cache=True)
def stumps_predict(Xq, base, feats, thrs, lefts, rights, lr):
    F = np.full(Xq.shape[0], base)
    for t in range(feats.shape[0]):
        _apply_stump(Xq, F, feats[t], thrs[t], lefts[t], rights[t], lr)
    return F


@njit(cache=True)
def grow_tree(X, y, sample_idx, feat_keys, mtry, min_leaf):
    """CART regression tree on the (possibly repeated) rows ``sample_idx``.

    Nodes are numbered in creation order; node ``m`` considers the ``mtry``
    coordinates with the smallest ``feat_keys[m]`` entries. Leaves carry
    ``feature == -1``.
    """
    p = X.shape[1]
    m_in = sample_idx.shape[0]
    cap = 2 * m_in + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros(cap)
    idx = sample_idx.copy()
    buf = np.empty(m_in, np.int64)
    st_node = np.empty(cap, np.int64)
    st_lo = np.empty(cap, np.int64)
    st_hi = np.empty(cap, np.int64)
    top = 0
    st_node[0] = 0
    st_lo[0] = 0
    st_hi[0] = m_in
    top = 1
    n_nodes = 1
    xs = np.empty(m_in)
    ys = np.empty(m_in)
    while top > 0:
        top -= 1
        node = st_node[top]
        lo = st_lo[top]
        hi = st_hi[top]
        cnt = hi - lo
        s_tot = 0.0
        for a in range(lo, hi):
            s_tot += y[idx[a]]
        value[node] = s_tot / cnt
        if cnt < 2 * min_leaf:
            continue
        cand = np.sort(np.argsort(feat_keys[node])[:mtry])
        best_gain = -np.inf
        best_f = -1
        best_thr = 0.0
        for f in cand:
            vals = np.empty(cnt)
            for a in range(cnt):
                vals[a] = X[idx[lo + a], f]
            o = np.argsort(vals, kind="mergesort")
            for a in range(cnt):
                xs[a] = vals[o[a]]
                ys[a] = y[idx[lo + o[a]]]
            s = 0.0
            for a in range(cnt - 1):
                s += ys[a]
                nl = a + 1
                nr = cnt - nl
                if nl < min_leaf:
                    continue
                if nr < min_leaf:
                    break
                if xs[a] < xs[a + 1]:
                    sr = s_tot - s
                    gain = s * s / nl + sr * sr / nr
                    if gain > best_gain:
                        best_gain = gain
                        best_f = f
                        best_thr = (xs[a] + xs[a + 1]) * 0.5
        if best_f < 0:
            continue
        # stable partition of idx[lo:hi]
        nl = 0
        for a in range(lo, hi):
            if X[idx[a], best_f] <= best_thr:
                buf[nl] = idx[a]
                nl += 1
        b = nl
        for a in range(lo, hi):
            if not X[idx[a], best_f] <= best_thr:
                buf[b] = idx[a]
                b += 1
        for a in range(cnt):
            idx[lo + a] = buf[a]
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = n_nodes
        right[node] = n_nodes + 1
        n_nodes += 2
        # right pushed first so the left child is expanded first
        st_node[top] = right[node]
        st_lo[top] = lo + nl
        st_hi[top] = hi
        top += 1
        st_node[top] = left[node]
        st_lo[top] = lo
        st_hi[top] = lo + nl
        top += 1
    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
    )


@njit(cache=True)
def trees_predict(Xq, feature, threshold, left, right, value):
    """Per-tree predictions, shape ``(n_trees, m)``, from padded node tables."""
    T = feature.shape[0]
    m = Xq.shape[0]
    out = np.empty((T, m))
    for t in range(T):
        for q in range(m):
            node = 0
            while feature[t, node] >= 0:
                if Xq[q, feature[t, node]] <= threshold[t, node]:
                    node = left[t, node]
                else:
                    node = right[t, node]
            out[t, q] = value[t, node]
    return out
