"""Numba kernels for growing and applying weighted-gini decision trees."""

import numpy as np
from numba import njit

LEAF = -1


@njit(cache=True, nogil=True)
def _gini(w0, w1):
    total = w0 + w1
    if total <= 0.0:
        return 0.0
    p0 = w0 / total
    p1 = w1 / total
    return 1.0 - p0 * p0 - p1 * p1


INSERTION_CUTOFF = 32


def rank_encode(Xt):
    """Dense per-feature ranks of a D x n matrix plus the sorted distinct values.

    Returns (codes, values) where values[f, codes[f, i]] == Xt[f, i]; rows of
    ``values`` are padded past each feature's distinct count.
    """
    codes = np.empty(Xt.shape, dtype=np.int64)
    values = np.zeros(Xt.shape, dtype=np.float64)
    for f in range(Xt.shape[0]):
        uniq, inverse = np.unique(Xt[f], return_inverse=True)
        codes[f] = inverse
        values[f, :uniq.shape[0]] = uniq
    return codes, values


@njit(cache=True, nogil=True)
def _argsort_codes(keys, m, order, scratch, counts):
    """Stable argsort of keys[:m] (non-negative ints) into order[:m]."""
    if m <= INSERTION_CUTOFF:
        for i in range(m):
            order[i] = i
        for i in range(1, m):
            cur = order[i]
            kc = keys[cur]
            j = i - 1
            while j >= 0 and keys[order[j]] > kc:
                order[j + 1] = order[j]
                j -= 1
            order[j + 1] = cur
        return
    kmax = 0
    for i in range(m):
        order[i] = i
        if keys[i] > kmax:
            kmax = keys[i]
    shift = 0
    src = order
    dst = scratch
    while (kmax >> shift) > 0:
        counts[:] = 0
        for i in range(m):
            counts[((keys[src[i]] >> shift) & 255) + 1] += 1
        for b in range(256):
            counts[b + 1] += counts[b]
        for i in range(m):
            b = (keys[src[i]] >> shift) & 255
            dst[counts[b]] = src[i]
            counts[b] += 1
        src, dst = dst, src
        shift += 8
    if src is not order:
        for i in range(m):
            order[i] = src[i]


@njit(cache=True, nogil=True)
def grow_tree(codes, values, y, mult, class_weight, max_features, seed):
    """Grow one tree on rows with positive bootstrap multiplicity.

    ``codes``/``values`` come from rank_encode of the D x n transposed
    feature matrix, y holds 0/1 labels and mult the per-row multiplicities.
    A node is split while it holds at least two distinct rows, is impure, and some sampled feature is non-constant.
    Returns (feature, threshold, left, right, count, impurity) arrays; for
    leaves feature == -1 and count holds the raw class multiplicities.
    """
    np.random.seed(seed)
    n_features = codes.shape[0]
    rows = np.flatnonzero(mult > 0)
    n = rows.shape[0]
    cap = 2 * n + 1

    feature = np.full(cap, LEAF, dtype=np.int32)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, LEAF, dtype=np.int32)
    right = np.full(cap, LEAF, dtype=np.int32)
    count = np.zeros((cap, 2), dtype=np.float64)
    impurity = np.zeros(cap, dtype=np.float64)

    w = np.empty(n, dtype=np.float64)
    for i in range(n):
        w[i] = mult[rows[i]] * class_weight[y[rows[i]]]

    # positions into `rows`; nodes own contiguous ranges of this array
    idx = np.arange(n)
    buf = np.empty(n, dtype=np.int64)
    keys = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    scratch = np.empty(n, dtype=np.int64)
    counts = np.zeros(257, dtype=np.int64)
    candidates = np.arange(n_features)

    stack_node = np.empty(cap, dtype=np.int64)
    stack_start = np.empty(cap, dtype=np.int64)
    stack_end = np.empty(cap, dtype=np.int64)
    top = 0
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]

        c0 = 0.0
        c1 = 0.0
        w0 = 0.0
        w1 = 0.0
        for k in range(start, end):
            r = rows[idx[k]]
            if y[r] == 0:
                c0 += mult[r]
                w0 += w[idx[k]]
            else:
                c1 += mult[r]
                w1 += w[idx[k]]
        count[node, 0] = c0
        count[node, 1] = c1
        parent = _gini(w0, w1)
        impurity[node] = parent
        m = end - start
        if m < 2 or w0 == 0.0 or w1 == 0.0:
            continue

        best_score = -1.0
        best_feature = -1
        best_threshold = 0.0
        best_code = 0

        n_drawn = 0
        n_visited = 0
        while n_drawn < n_features and n_visited < max_features:
            # partial Fisher-Yates over the feature indices
            j = n_drawn + np.random.randint(0, n_features - n_drawn)
            f = candidates[j]
            candidates[j] = candidates[n_drawn]
            candidates[n_drawn] = f
            n_drawn += 1

            kmin = codes[f, rows[idx[start]]]
            kmax = kmin
            for k in range(m):
                c = codes[f, rows[idx[start + k]]]
                keys[k] = c
                if c < kmin:
                    kmin = c
                elif c > kmax:
                    kmax = c
            if kmin == kmax:
                continue
            for k in range(m):
                keys[k] -= kmin
            _argsort_codes(keys, m, order, scratch, counts)
            n_visited += 1

            lw0 = 0.0
            lw1 = 0.0
            for k in range(m - 1):
                pos = idx[start + order[k]]
                if y[rows[pos]] == 0:
                    lw0 += w[pos]
                else:
                    lw1 += w[pos]
                lo_code = keys[order[k]]
                hi_code = keys[order[k + 1]]
                if lo_code == hi_code:
                    continue
                rw0 = w0 - lw0
                rw1 = w1 - lw1
                lw = lw0 + lw1
                rw = rw0 + rw1
                # maximising this proxy minimises the weighted child gini
                score = (lw0 * lw0 + lw1 * lw1) / lw + (rw0 * rw0 + rw1 * rw1) / rw
                if score > best_score:
                    best_score = score
                    best_feature = f
                    best_code = lo_code + kmin
                    lo = values[f, lo_code + kmin]
                    hi = values[f, hi_code + kmin]
                    mid = lo + (hi - lo) / 2.0
                    if mid >= hi or mid < lo:
                        mid = lo
                    best_threshold = mid

        if best_feature < 0:
            continue

        # stable partition of this node's range
        n_left = 0
        for k in range(start, end):
            if codes[best_feature, rows[idx[k]]] <= best_code:
                idx[start + n_left] = idx[k]
                n_left += 1
            else:
                buf[k - start - n_left] = idx[k]
        for k in range(m - n_left):
            idx[start + n_left + k] = buf[k]

        feature[node] = best_feature
        threshold[node] = best_threshold
        lchild = n_nodes
        rchild = n_nodes + 1
        n_nodes += 2
        left[node] = lchild
        right[node] = rchild
        # right pushed first so the left subtree is numbered depth-first
        stack_node[top] = rchild
        stack_start[top] = start + n_left
        stack_end[top] = end
        top += 1
        stack_node[top] = lchild
        stack_start[top] = start
        stack_end[top] = start + n_left
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), count[:n_nodes].copy(), impurity[:n_nodes].copy())


@njit(cache=True, nogil=True)
def apply_tree(feature, threshold, left, right, X):
    """Index of the leaf each row of X lands in."""
    out = np.empty(X.shape[0], dtype=np.int64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] != LEAF:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out
