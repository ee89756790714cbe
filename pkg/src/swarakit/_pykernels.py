"""Pure numpy/Python versions of the hot loops.

Semantics match ``_ckernels.pyx`` exactly (same tie-breaking, same
accumulation order for the DP tables); only floating-point summation order
inside vectorized reductions may differ in the last bits.
"""

from __future__ import annotations

import numpy as np


def edit_ops(ref: np.ndarray, hyp: np.ndarray) -> tuple[int, int, int]:
    """Levenshtein counts (substitutions, insertions, deletions).

    Backtrace prefers substitution/match, then insertion, then deletion.
    """
    n, m = len(ref), len(hyp)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dp[i][0] = i
    for j in range(m + 1):
        dp[0][j] = j
    for i in range(1, n + 1):
        ri = ref[i - 1]
        row, prev = dp[i], dp[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (ri != hyp[j - 1])
            ins = row[j - 1] + 1
            dele = prev[j] + 1
            row[j] = min(sub, ins, dele)

    s = ins_n = del_n = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            diff = ref[i - 1] != hyp[j - 1]
            if dp[i][j] == dp[i - 1][j - 1] + diff:
                s += int(diff)
                i -= 1
                j -= 1
                continue
        if j > 0 and dp[i][j] == dp[i][j - 1] + 1:
            ins_n += 1
            j -= 1
        else:
            del_n += 1
            i -= 1
    return s, ins_n, del_n


def dtw_path(cost: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimum-cost monotone path with steps (1,0), (0,1), (1,1).

    Returns the path as an ``(L, 2)`` int array and the accumulated cost.
    Backtrace ties prefer the diagonal, then the vertical step.
    """
    n, m = cost.shape
    c = cost.tolist()
    acc = [[0.0] * m for _ in range(n)]
    acc[0][0] = c[0][0]
    for j in range(1, m):
        acc[0][j] = c[0][j] + acc[0][j - 1]
    for i in range(1, n):
        acc[i][0] = c[i][0] + acc[i - 1][0]
        row, prev, ci = acc[i], acc[i - 1], c[i]
        for j in range(1, m):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if row[j - 1] < best:
                best = row[j - 1]
            row[j] = ci[j] + best

    path = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            d, v, h = acc[i - 1][j - 1], acc[i - 1][j], acc[i][j - 1]
            best = min(d, v, h)
            if d == best:
                i -= 1
                j -= 1
            elif v == best:
                i -= 1
            else:
                j -= 1
        path.append((i, j))
    path.reverse()
    return np.asarray(path, dtype=np.int64), float(acc[n - 1][m - 1])


def nearest_centroid(x: np.ndarray, centroids: np.ndarray, chunk: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """Index of and squared distance to the nearest centroid; lowest index wins ties.

    Candidates come from the expanded form |x|^2 - 2 x.c + |c|^2 (one BLAS
    call); every centroid within a generous rounding margin of the best is
    then rescored from explicit differences, so the choice does not depend
    on the expansion's cancellation error.
    """
    n = x.shape[0]
    idx = np.empty(n, dtype=np.int64)
    dist = np.empty(n, dtype=np.float64)
    cc = np.einsum("kd,kd->k", centroids, centroids)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        xs = x[lo:hi]
        xx = np.einsum("nd,nd->n", xs, xs)
        approx = xx[:, None] - 2.0 * (xs @ centroids.T) + cc[None, :]
        margin = 1e-8 * (xx + cc.max()) + 1e-300
        rows, cols = np.nonzero(approx <= approx.min(axis=1, keepdims=True) + margin[:, None])
        diff = xs[rows] - centroids[cols]
        exact = np.full(approx.shape, np.inf)
        exact[rows, cols] = np.einsum("nd,nd->n", diff, diff)
        k = np.argmin(exact, axis=1)  # argmin returns the first minimum
        idx[lo:hi] = k
        dist[lo:hi] = exact[np.arange(hi - lo), k]
    return idx, dist


def polyphase_apply(
    xp: np.ndarray, taps: np.ndarray, bases: np.ndarray, phases: np.ndarray, chunk: int = 8192
) -> np.ndarray:
    """``out[n] = sum_t taps[phases[n], t] * xp[bases[n] + t]``."""
    n_out = bases.shape[0]
    width = taps.shape[1]
    out = np.empty(n_out, dtype=np.float64)
    offs = np.arange(width)
    for lo in range(0, n_out, chunk):
        hi = min(lo + chunk, n_out)
        seg = xp[bases[lo:hi, None] + offs]
        out[lo:hi] = np.einsum("nt,nt->n", seg, taps[phases[lo:hi]])
    return out
