"""Compare the numba and numpy region-propagation kernels.

Usage: python3 benchmarks/bench_kernels.py [--points 5 20000] [--repeat 20]

Both kernels run on the same frequency grids; the script checks they agree
before timing anything and prints the best-of-repeat wall time per case.
Small grids (single-frequency solves, phase-time stencils) are where the
compiled loop pays off; on long grids numpy is already vectorized across
frequencies and the two are close.
"""
import argparse
import time

import numpy as np

from multibarrier._kernels import _numba, _numpy

CASES = [
    # (N, width, period)
    (1, 4.0, 4.0),
    (2, 4.0, 10.0),
    (5, 4.0, 10.0),
    (20, 1.0, 3.0),
]


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, nargs="+", default=[5, 20_000])
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--height", type=float, default=10.0)
    args = parser.parse_args()

    # compile outside the timed region
    _numba.propagate_regions(np.ones(2), np.ones(2, dtype=complex), 1, 1.0, 1.0)

    for points in args.points:
        omega = np.linspace(0.01, args.height - 0.01, points)
        k = np.sqrt(omega)
        chi = np.sqrt(args.height - omega + 0j)
        print(f"\n{points} frequencies")
        print(f"{'N':>4} {'a':>5} {'L':>5} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>8}")
        for n, a, period in CASES:
            ref = _numpy.propagate_regions(k, chi, n, a, period)
            got = _numba.propagate_regions(k, chi, n, a, period)
            if not (np.allclose(ref[0], got[0], atol=1e-13) and np.allclose(ref[1], got[1], atol=1e-10)):
                raise SystemExit(f"backends disagree for N={n}, a={a}, L={period}")
            t_np = best_time(lambda: _numpy.propagate_regions(k, chi, n, a, period), args.repeat)
            t_nb = best_time(lambda: _numba.propagate_regions(k, chi, n, a, period), args.repeat)
            print(f"{n:>4} {a:>5g} {period:>5g} {1e3 * t_np:>12.3f} {1e3 * t_nb:>12.3f} {t_np / t_nb:>7.1f}x")

if __name__ == "__main__":
    main()
