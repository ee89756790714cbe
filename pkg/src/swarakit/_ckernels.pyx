# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_pykernels``.

Same signatures, same tie-breaking. Sums are sequential in index order.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def edit_ops(const long long[::1] ref, const long long[::1] hyp):
    cdef Py_ssize_t n = ref.shape[0], m = hyp.shape[0]
    cdef Py_ssize_t i, j
    cdef long long sub, ins, dele, best, diff
    cdef long long[:, ::1] dp = np.empty((n + 1, m + 1), dtype=np.int64)
    for i in range(n + 1):
        dp[i, 0] = i
    for j in range(m + 1):
        dp[0, j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = dp[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1])
            ins = dp[i, j - 1] + 1
            dele = dp[i - 1, j] + 1
            best = sub
            if ins < best:
                best = ins
            if dele < best:
                best = dele
            dp[i, j] = best

    cdef long long s = 0, ni = 0, nd = 0
    i = n
    j = m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            diff = ref[i - 1] != hyp[j - 1]
            if dp[i, j] == dp[i - 1, j - 1] + diff:
                s += diff
                i -= 1
                j -= 1
                continue
        if j > 0 and dp[i, j] == dp[i, j - 1] + 1:
            ni += 1
            j -= 1
        else:
            nd += 1
            i -= 1
    return int(s), int(ni), int(nd)


def dtw_path(const double[:, :] cost):
    cdef Py_ssize_t n = cost.shape[0], m = cost.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double best, d, v, h
    cdef double[:, ::1] acc = np.empty((n, m), dtype=np.float64)
    acc[0, 0] = cost[0, 0]
    for j in range(1, m):
        acc[0, j] = cost[0, j] + acc[0, j - 1]
    for i in range(1, n):
        acc[i, 0] = cost[i, 0] + acc[i - 1, 0]
        for j in range(1, m):
            best = acc[i - 1, j - 1]
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
            acc[i, j] = cost[i, j] + best

    cdef long long[:, ::1] path = np.empty((n + m - 1, 2), dtype=np.int64)
    k = 0
    i = n - 1
    j = m - 1
    path[0, 0] = i
    path[0, 1] = j
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            d = acc[i - 1, j - 1]
            v = acc[i - 1, j]
            h = acc[i, j - 1]
            best = d
            if v < best:
                best = v
            if h < best:
                best = h
            if d == best:
                i -= 1
                j -= 1
            elif v == best:
                i -= 1
            else:
                j -= 1
        k += 1
        path[k, 0] = i
        path[k, 1] = j
    out = np.asarray(path[: k + 1])[::-1].copy()
    return out, float(acc[n - 1, m - 1])


def nearest_centroid(const double[:, ::1] x, const double[:, ::1] centroids):
    cdef Py_ssize_t n = x.shape[0], kk = centroids.shape[0], dim = x.shape[1]
    cdef Py_ssize_t i, k, d
    cdef double acc, diff, best
    cdef Py_ssize_t best_k
    idx_arr = np.empty(n, dtype=np.int64)
    dist_arr = np.empty(n, dtype=np.float64)
    cdef long long[::1] idx = idx_arr
    cdef double[::1] dist = dist_arr
    with nogil:
        for i in range(n):
            best = 1e308
            best_k = 0
            for k in range(kk):
                acc = 0.0
                for d in range(dim):
                    diff = x[i, d] - centroids[k, d]
                    acc = acc + diff * diff
                if acc < best:
                    best = acc
                    best_k = k
            idx[i] = best_k
            dist[i] = best
    return idx_arr, dist_arr


def polyphase_apply(const double[::1] xp, const double[:, ::1] taps,
                    const long long[::1] bases, const long long[::1] phases):
    cdef Py_ssize_t n_out = bases.shape[0], width = taps.shape[1]
    cdef Py_ssize_t n, t, b, p
    cdef double acc
    out_arr = np.empty(n_out, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for n in range(n_out):
            b = bases[n]
            p = phases[n]
            acc = 0.0
            for t in range(width):
                acc = acc + taps[p, t] * xp[b + t]
            out[n] = acc
    return out_arr
