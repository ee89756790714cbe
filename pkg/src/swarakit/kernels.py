"""Hot-loop dispatch: compiled kernels when built, numpy fallback otherwise.

Set ``SWARAKIT_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and by the backend-equivalence tests).
"""

from __future__ import annotations

import os

import numpy as np

from swarakit import _pykernels

try:
    if os.environ.get("SWARAKIT_PURE_PYTHON"):
        raise ImportError("compiled kernels disabled by SWARAKIT_PURE_PYTHON")
    from swarakit import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"


def edit_ops(ref, hyp) -> tuple[int, int, int]:
    return _impl.edit_ops(np.ascontiguousarray(ref, dtype=np.int64), np.ascontiguousarray(hyp, dtype=np.int64))


def dtw_path(cost) -> tuple[np.ndarray, float]:
    return _impl.dtw_path(np.ascontiguousarray(cost, dtype=np.float64))


def nearest_centroid(x, centroids) -> tuple[np.ndarray, np.ndarray]:
    # The BLAS-pruned numpy version outruns the compiled loop here, so both
    # backends use it; the loop remains as a cross-check in the tests.
    return _pykernels.nearest_centroid(
        np.ascontiguousarray(x, dtype=np.float64), np.ascontiguousarray(centroids, dtype=np.float64)
    )


def polyphase_apply(xp, taps, bases, phases) -> np.ndarray:
    return _impl.polyphase_apply(
        np.ascontiguousarray(xp, dtype=np.float64),
        np.ascontiguousarray(taps, dtype=np.float64),
        np.ascontiguousarray(bases, dtype=np.int64),
        np.ascontiguousarray(phases, dtype=np.int64),
    )
