"""Time the numba and numpy paths of the hot kernels.

    python benchmarks/bench_kernels.py [--repeat N]

The first numba call (compilation) is excluded from the timings.
"""

import argparse
import time

import numpy as np

from hsinterp import kernels
from hsinterp._accel import HAVE_NUMBA
from hsinterp.interpret import scan_slopes


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)

    n = 2852
    x, y = rng.uniform(0, 0.5, n), rng.uniform(0, 0.8, n)
    scan_args = (x, y, rng.random(n) < 0.5, scan_slopes())
    cube = rng.uniform(0, 1, (300 * 300, 181))
    nd_args = (cube, np.arange(25, 29), np.arange(47, 52))

    cases = [
        (f"slope_scan ({n} points x 512 slopes)", kernels.slope_scan_numba,
         kernels.slope_scan_numpy, scan_args),
        ("normalized_difference (90000 px x 181 bands)", kernels.normalized_difference_numba,
         kernels.normalized_difference_numpy, nd_args),
    ]
    if not HAVE_NUMBA:
        print("numba not installed; the numba column runs the same python loop uncompiled")
    print(f"{'kernel':48s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, fast, slow, call in cases:
        assert np.array_equal(fast(*call), slow(*call), equal_nan=True)  # also warms up the jit
        t_fast, t_slow = best_of(fast, call, args.repeat), best_of(slow, call, args.repeat)
        print(f"{name:48s} {t_fast * 1e3:10.2f} {t_slow * 1e3:10.2f} {t_slow / t_fast:8.1f}x")


if __name__ == "__main__":
    main()
