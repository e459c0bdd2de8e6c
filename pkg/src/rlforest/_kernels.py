"""Compiled kernels shared by the split search, the CART grower and the RL tree.

Everything random in a tree is drawn from counter-based splitmix64 streams
keyed by a 63-bit seed. Seeds for sub-tasks are derived from a parent seed
and an integer label, so a node's draws depend only on its position in the
tree, never on the order in which nodes or trees are built.
"""

import numpy as np
from numba import njit

# Labels used for seed derivation.
LEFT = 1
RIGHT = 2
FEATURES = 11
BERNOULLI = 12
LOCAL = 13
SUBSAMPLE = 21
ROOT = 22
BOOTSTRAP = 23

# Two gains closer than this are a tie; the earlier candidate wins.
TIE = 1e-12

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True)
def _mix(z):
    z = z + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def derive_seed(seed, label):
    z = _mix(np.uint64(seed) ^ _mix(np.uint64(label)))
    return np.int64(z >> np.uint64(1))


@njit(cache=True, nogil=True)
def new_stream(seed):
    state = np.empty(1, dtype=np.uint64)
    state[0] = np.uint64(seed)
    return state


@njit(cache=True, nogil=True)
def next_uniform(state):
    state[0] = state[0] + _GOLDEN
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    z = z ^ (z >> np.uint64(31))
    return np.float64(z >> np.uint64(11)) * _INV53


@njit(cache=True, nogil=True)
def next_below(state, n):
    return np.int64(next_uniform(state) * n)


@njit(cache=True, nogil=True)
def stream_uniform(seed):
    """First uniform draw of the stream keyed by ``seed``."""
    return next_uniform(new_stream(seed))


@njit(cache=True, nogil=True)
def draw_features(seed, d, mtry):
    """``mtry`` distinct feature indices out of ``d``, sorted ascending."""
    state = new_stream(seed)
    perm = np.arange(d)
    for i in range(mtry):
        j = i + next_below(state, d - i)
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
    return np.sort(perm[:mtry])


@njit(cache=True, nogil=True)
def leaf_mean(y, idx):
    s = 0.0
    for i in range(idx.shape[0]):
        s += y[idx[i]]
    return s / idx.shape[0]


@njit(cache=True, nogil=True)
def _centered(y, idx):
    """Node responses minus their mean, and the compensated sum of the result.

    A constant node yields exact zeros so that every gain is exactly 0.
    """
    m = idx.shape[0]
    s = 0.0
    c = 0.0
    lo = y[idx[0]]
    hi = lo
    for i in range(m):
        v = y[idx[i]]
        if v < lo:
            lo = v
        if v > hi:
            hi = v
        t = v - c
        u = s + t
        c = (u - s) - t
        s = u
    yc = np.zeros(m)
    if lo == hi:
        return yc, 0.0
    mean = s / m
    s = 0.0
    c = 0.0
    for i in range(m):
        v = y[idx[i]] - mean
        yc[i] = v
        t = v - c
        u = s + t
        c = (u - s) - t
        s = u
    return yc, s


@njit(cache=True, nogil=True)
def midpoint(a, b):
    z = a + (b - a) / 2.0
    if z <= a or z > b:
        z = b
    return z


@njit(cache=True, nogil=True)
def _scan(vals, yc, total, best_gain, has_best):
    """Scan the cuts of ``vals`` left to right with compensated running sums.

    Returns (left_count, threshold, gain) of the first cut beating
    ``best_gain`` by more than TIE (any cut if ``has_best`` is false), or a
    zero left_count when nothing improves.
    """
    n = vals.shape[0]
    order = np.argsort(vals, kind="mergesort")
    nf = float(n)
    s = 0.0
    c = 0.0
    out_left = 0
    out_z = 0.0
    out_gain = best_gain
    for i in range(n - 1):
        v = yc[order[i]] - c
        u = s + v
        c = (u - s) - v
        s = u
        a = vals[order[i]]
        b = vals[order[i + 1]]
        if a < b:
            nl = i + 1.0
            nr = nf - nl
            diff = s / nl - (total - s) / nr
            g = (nl / nf) * (nr / nf) * diff * diff
            if not has_best or g > out_gain + TIE:
                out_left = i + 1
                out_z = midpoint(a, b)
                out_gain = g
                has_best = True
    return out_left, out_z, out_gain


@njit(cache=True, nogil=True)
def riemann_search(X, y, idx, features):
    """Best (feature, threshold) cut of the node; feature -1 when none exists."""
    m = idx.shape[0]
    yc, total = _centered(y, idx)
    vals = np.empty(m)
    best_j = -1
    best_z = 0.0
    best_gain = 0.0
    best_left = 0
    for f in range(features.shape[0]):
        j = features[f]
        for i in range(m):
            vals[i] = X[idx[i], j]
        nl, z, g = _scan(vals, yc, total, best_gain, best_j >= 0)
        if nl > 0:
            best_j = j
            best_z = z
            best_gain = g
            best_left = nl
    return best_j, best_z, best_gain, best_left


@njit(cache=True, nogil=True)
def lebesgue_search(y, idx):
    """Best response-axis cut of the node; zero down-count when none exists."""
    m = idx.shape[0]
    yc, total = _centered(y, idx)
    vals = np.empty(m)
    for i in range(m):
        vals[i] = y[idx[i]]
    return _scan(vals, yc, total, 0.0, False)


@njit(cache=True, nogil=True)
def grow_cart(X, y, sample, mtry, min_node, seed,
              feature, threshold, left, right, value, start):
    """Grow one CART tree on ``sample`` into the node arrays from ``start``.

    Nodes with more than ``min_node`` points are cut at the best Riemann split
    among ``mtry`` freshly drawn features; a node whose features are all
    constant, or whose best cut has zero gain, becomes a leaf. Returns the
    next free node slot.
    """
    m = sample.shape[0]
    d = X.shape[1]
    work = sample.copy()
    tmp = np.empty(m, dtype=work.dtype)
    st_node = np.empty(m + 1, dtype=np.int64)
    st_lo = np.empty(m + 1, dtype=np.int64)
    st_hi = np.empty(m + 1, dtype=np.int64)
    st_seed = np.empty(m + 1, dtype=np.int64)
    nxt = start + 1
    st_node[0] = start
    st_lo[0] = 0
    st_hi[0] = m
    st_seed[0] = seed
    sp = 1
    while sp > 0:
        sp -= 1
        node = st_node[sp]
        lo = st_lo[sp]
        hi = st_hi[sp]
        nseed = st_seed[sp]
        seg = work[lo:hi]
        cut = False
        if hi - lo > min_node:
            feats = draw_features(derive_seed(nseed, FEATURES), d, mtry)
            j, z, g, nl = riemann_search(X, y, seg, feats)
            if j >= 0 and g > 0.0:
                a = 0
                b = nl
                for i in range(hi - lo):
                    r = seg[i]
                    if X[r, j] < z:
                        tmp[a] = r
                        a += 1
                    else:
                        tmp[b] = r
                        b += 1
                for i in range(hi - lo):
                    seg[i] = tmp[i]
                feature[node] = j
                threshold[node] = z
                value[node] = 0.0
                left[node] = nxt
                right[node] = nxt + 1
                st_node[sp] = nxt + 1
                st_lo[sp] = lo + nl
                st_hi[sp] = hi
                st_seed[sp] = derive_seed(nseed, RIGHT)
                st_node[sp + 1] = nxt
                st_lo[sp + 1] = lo
                st_hi[sp + 1] = lo + nl
                st_seed[sp + 1] = derive_seed(nseed, LEFT)
                sp += 2
                nxt += 2
                cut = True
        if not cut:
            feature[node] = -1
            threshold[node] = 0.0
            left[node] = -1
            right[node] = -1
            value[node] = leaf_mean(y, seg)
    return nxt


@njit(cache=True, nogil=True)
def grow_cart_forest(X, y, idx, n_trees, mtry, min_node, seed, bootstrap):
    """Grow ``n_trees`` CART trees over the rows ``idx``.

    With ``bootstrap`` each tree sees a with-replacement resample of ``idx``
    of the same size; otherwise every tree sees ``idx`` itself.
    """
    m = idx.shape[0]
    cap = n_trees * (2 * m - 1)
    feature = np.empty(cap, dtype=np.int32)
    threshold = np.empty(cap)
    left = np.empty(cap, dtype=np.int32)
    right = np.empty(cap, dtype=np.int32)
    value = np.empty(cap)
    roots = np.empty(n_trees, dtype=np.int64)
    nxt = 0
    sample = np.empty(m, dtype=idx.dtype)
    for t in range(n_trees):
        tseed = derive_seed(seed, t)
        if bootstrap:
            state = new_stream(derive_seed(tseed, BOOTSTRAP))
            pos = np.empty(m, dtype=np.int64)
            for i in range(m):
                pos[i] = next_below(state, m)
            pos.sort()
            for i in range(m):
                sample[i] = idx[pos[i]]
        else:
            for i in range(m):
                sample[i] = idx[i]
        roots[t] = nxt
        nxt = grow_cart(X, y, sample, mtry, min_node, derive_seed(tseed, ROOT),
                        feature, threshold, left, right, value, nxt)
    return (feature[:nxt].copy(), threshold[:nxt].copy(), left[:nxt].copy(),
            right[:nxt].copy(), value[:nxt].copy(), roots)


@njit(cache=True, nogil=True)
def predict_cart_forest(X, feature, threshold, left, right, value, roots):
    n = X.shape[0]
    t_count = roots.shape[0]
    out = np.empty(n)
    for r in range(n):
        s = 0.0
        for t in range(t_count):
            node = roots[t]
            while left[node] >= 0:
                if X[r, feature[node]] < threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            s += value[node]
        out[r] = s / t_count
    return out


@njit(cache=True, nogil=True)
def predict_cart_trees(X, feature, threshold, left, right, value, roots):
    """Per-tree predictions, shape (n_trees, n_rows)."""
    n = X.shape[0]
    t_count = roots.shape[0]
    out = np.empty((t_count, n))
    for t in range(t_count):
        for r in range(n):
            node = roots[t]
            while left[node] >= 0:
                if X[r, feature[node]] < threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[t, r] = value[node]
    return out
