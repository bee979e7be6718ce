"""Vectorized numpy twins of the numba kernels in ``_jit.py``."""

import numpy as np

_BLOCK = 1 << 22  # query rows x training rows per distance block


def _sq_dists(Xtr, Xq):
    d = np.zeros((Xq.shape[0], Xtr.shape[0]))
    for j in range(Xtr.shape[1]):
        t = Xq[:, j, None] - Xtr[None, :, j]
        d += t * t
    return d


def _blocks(m, n):
    step = max(1, _BLOCK // max(n, 1))
    for lo in range(0, m, step):
        yield slice(lo, min(m, lo + step))


def knn_predict(Xtr, ytr, Xq, k):
    out = np.empty(Xq.shape[0])
    for sl in _blocks(Xq.shape[0], Xtr.shape[0]):
        d = _sq_dists(Xtr, Xq[sl])
        nearest = np.argsort(d, axis=1, kind="stable")[:, :k]
        out[sl] = np.cumsum(ytr[nearest], axis=1)[:, -1] / k
    return out


def nw_predict(Xtr, ytr, Xq, h, fallback):
    out = np.empty(Xq.shape[0])
    scale = 1.0 / (2.0 * h * h)
    for sl in _blocks(Xq.shape[0], Xtr.shape[0]):
        w = np.exp(-_sq_dists(Xtr, Xq[sl]) * scale)
        num = np.cumsum(w * ytr, axis=1)[:, -1]
        den = np.cumsum(w, axis=1)[:, -1]
        safe = den > 0.0
        out[sl] = np.where(safe, num / np.where(safe, den, 1.0), fallback)
    return out


def stump_split(X, order, r, w):
    n, p = X.shape
    active = w > 0.0
    n_tot = int(active.sum())
    s_tot = np.cumsum(np.where(active, r, 0.0))[-1] if n else 0.0
    best = (-1, 0.0, 0.0, 0.0, -np.inf)
    for f in range(p):
        o = order[f][active[order[f]]]
        xs = X[o, f]
        s = np.cumsum(r[o])[:-1]
        c = np.arange(1, len(o), dtype=np.float64)
        ok = xs[:-1] < xs[1:]
        if not ok.any():
            continue
        sr = s_tot - s
        cr = n_tot - c
        gain = np.where(ok, s * s / c + sr * sr / np.where(ok, cr, 1.0), -np.inf)
        a = int(np.argmax(gain))
        if gain[a] > best[4]:
            best = (f, (xs[a] + xs[a + 1]) * 0.5, s[a] / c[a], sr[a] / cr[a], gain[a])
    if best[0] < 0:
        mean = s_tot / n_tot if n_tot > 0 else 0.0
        return -1, 0.0, mean, mean, 0.0
    return best


def _apply_stump(X, F, f, thr, lv, rv, lr):
    if f < 0:
        F += lr * lv
    else:
        F += np.where(X[:, f] <= thr, lr * lv, lr * rv)


def boost_cv(X, order, y, fold_of, n_folds, max_rounds, lr, patience):
    n = X.shape[0]
    F = np.empty((n_folds, n))
    train = [fold_of != k for k in range(n_folds)]
    for k in range(n_folds):
        F[k] = np.cumsum(y[train[k]])[-1] / train[k].sum()
    curve = np.full(max_rounds, np.nan)
    best, best_t = np.inf, 0
    for t in range(max_rounds):
        total = 0.0
        for k in range(n_folds):
            f, thr, lv, rv, _ = stump_split(X, order, y - F[k], train[k].astype(float))
            _apply_stump(X, F[k], f, thr, lv, rv, lr)
            e = (y - F[k])[~train[k]]
            total += np.cumsum(e * e)[-1] / e.shape[0]
        curve[t] = total / n_folds
        if curve[t] < best:
            best, best_t = curve[t], t
        elif t - best_t >= patience:
            break
    return curve, best_t + 1


def boost_fit(X, order, y, rounds, lr):
    n = X.shape[0]
    base = np.cumsum(y)[-1] / n
    F = np.full(n, base)
    w = np.ones(n)
    feats = np.empty(rounds, np.int64)
    thrs, lefts, rights = np.empty(rounds), np.empty(rounds), np.empty(rounds)
    for t in range(rounds):
        f, thr, lv, rv, _ = stump_split(X, order, y - F, w)
        feats[t], thrs[t], lefts[t], rights[t] = f, thr, lv, rv
        _apply_stump(X, F, f, thr, lv, rv, lr)
    return base, feats, thrs, lefts, rights


def stumps_predict(Xq, base, feats, thrs, lefts, rights, lr):
    F = np.full(Xq.shape[0], base)
    for t in range(feats.shape[0]):
        _apply_stump(Xq, F, feats[t], thrs[t], lefts[t], rights[t], lr)
    return F


def _best_node_split(X, y, node_idx, cand, min_leaf, s_tot):
    cnt = node_idx.shape[0]
    best = (-1, 0.0, -np.inf)
    nl = np.arange(1, cnt, dtype=np.float64)
    nr = cnt - nl
    size_ok = (nl >= min_leaf) & (nr >= min_leaf)
    for f in cand:
        vals = X[node_idx, f]
        o = np.argsort(vals, kind="stable")
        xs = vals[o]
        s = np.cumsum(y[node_idx[o]])[:-1]
        ok = size_ok & (xs[:-1] < xs[1:])
        if not ok.any():
            continue
        sr = s_tot - s
        gain = np.where(ok, s * s / nl + sr * sr / nr, -np.inf)
        a = int(np.argmax(gain))
        if gain[a] > best[2]:
            best = (int(f), (xs[a] + xs[a + 1]) * 0.5, gain[a])
    return best


def grow_tree(X, y, sample_idx, feat_keys, mtry, min_leaf):
    feature, threshold, left, right, value = [-1], [0.0], [-1], [-1], [0.0]
    stack = [(0, np.asarray(sample_idx, dtype=np.int64))]
    while stack:
        node, node_idx = stack.pop()
        cnt = node_idx.shape[0]
        s_tot = np.cumsum(y[node_idx])[-1]
        value[node] = s_tot / cnt
        if cnt < 2 * min_leaf:
            continue
        cand = np.sort(np.argsort(feat_keys[node])[:mtry])
        f, thr, _ = _best_node_split(X, y, node_idx, cand, min_leaf, s_tot)
        if f < 0:
            continue
        go_left = X[node_idx, f] <= thr
        lid = len(feature)
        feature[node], threshold[node] = f, thr
        left[node], right[node] = lid, lid + 1
        for _ in range(2):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(0.0)
        stack.append((lid + 1, node_idx[~go_left]))
        stack.append((lid, node_idx[go_left]))
    return (
        np.array(feature, np.int64),
        np.array(threshold),
        np.array(left, np.int64),
        np.array(right, np.int64),
        np.array(value),
    )


def trees_predict(Xq, feature, threshold, left, right, value):
    T = feature.shape[0]
    m = Xq.shape[0]
    out = np.empty((T, m))
    rows = np.arange(m)
    for t in range(T):
        node = np.zeros(m, np.int64)
        live = feature[t, node] >= 0
        while live.any():
            nd = node[live]
            go_left = Xq[rows[live], feature[t, nd]] <= threshold[t, nd]
            node[live] = np.where(go_left, left[t, nd], right[t, nd])
            live = feature[t, node] >= 0
        out[t] = value[t, node]
    return out
