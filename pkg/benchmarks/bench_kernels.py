"""Compare the compiled and pure-Python kernels on the audit hot paths.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import math
import timeit

import numpy as np

from secnc import _pykernels

try:
    from secnc import _ckernels
except ImportError:
    _ckernels = None


def cases(rng):
    q = 10007
    g = rng.integers(0, q, size=(12, 4), dtype=np.int64)
    return {
        "rank_mod 8x8 q=10007": lambda k: k.rank_mod(rng.integers(0, q, size=(8, 8), dtype=np.int64), q),
        "rank_batch 2000x3x4 q=3": (lambda a: lambda k: k.rank_batch(a, 3))(
            rng.integers(0, 3, size=(2000, 3, 4), dtype=np.int64)
        ),
        f"audit_scan C(12,3)={math.comb(12, 3)} exhaustive": lambda k: k.audit_scan(g, 1, 3, q, True),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; only the Python backend is timed")
    rng = np.random.default_rng(0)
    print(f"{'case':40s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:40s} {py:10.3f} {'-':>10s} {'-':>8s}")
            continue
        cy = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:40s} {py:10.3f} {cy:10.3f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
