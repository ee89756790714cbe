"""Time the compiled kernels against the numpy/Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from swarakit import _pykernels

try:
    from swarakit import _ckernels
except ImportError:
    _ckernels = None


def _best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng: np.random.Generator):
    ref = rng.integers(0, 50, 400)
    hyp = rng.integers(0, 50, 380)
    cost = rng.random((300, 320))
    x = rng.standard_normal((4096, 80))
    cents = rng.standard_normal((64, 80))
    from swarakit.audio_io import _polyphase_table

    taps, half = _polyphase_table(147, 20)  # 6 kHz -> 44.1 kHz
    n_out = 44100
    pos = np.arange(n_out, dtype=np.int64) * 20
    xp = rng.standard_normal(n_out // 7 + 2 * half + 4)
    return {
        "edit_ops 400x380": lambda k: k.edit_ops(ref, hyp),
        "dtw_path 300x320": lambda k: k.dtw_path(cost),
        "nearest_centroid 4096x64x80": lambda k: k.nearest_centroid(x, cents),
        "polyphase_apply 1 s @ 44.1 kHz": lambda k: k.polyphase_apply(xp, taps, pos // 147, pos % 147),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels are not built; only the fallback can be timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'python (s)':>11s} {'cython (s)':>11s} {'speedup':>8s}")
    for name, call in cases(rng).items():
        py = _best(lambda: call(_pykernels), args.repeat)
        if _ckernels is None:
            print(f"{name:32s} {py:11.4f} {'-':>11s} {'-':>8s}")
            continue
        cy = _best(lambda: call(_ckernels), args.repeat)
        print(f"{name:32s} {py:11.4f} {cy:11.4f} {py / cy:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
