"""Compare the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Compilation happens once before timing (``cache=True`` also keeps it on disk).
Results are checked for agreement before any timing is reported.
"""
import argparse
import timeit

import numpy as np

from gridrecover._kernels import numba_impl, numpy_impl
from gridrecover.bsvt import threshold_candidates


def cases(rng):
    s = np.sort(rng.random(200))[::-1] * 50.0
    taus = threshold_candidates(s, 512)
    u = rng.random(200 * 200 * 25)
    flags = rng.random(u.size) < 0.3
    return {
        "sure_curve (200 sv, 712 taus)": lambda impl: impl.sure_curve(s, taus, 0.5, 200, 200, True),
        "markov_chain (1e6 steps)": lambda impl: impl.markov_chain(u, 0.02, 0.05),
        "count_runs (1e6 flags)": lambda impl: impl.count_runs(flags),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        a, b = fn(numpy_impl), fn(numba_impl)  # warm-up + JIT
        if isinstance(a, np.ndarray) and a.dtype == np.bool_:
            assert np.array_equal(a, b), name
        else:
            np.testing.assert_allclose(a, b, rtol=1e-9)
        t_np = min(timeit.repeat(lambda: fn(numpy_impl), number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: fn(numba_impl), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:32s} {t_np:10.2f} {t_nb:10.2f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
