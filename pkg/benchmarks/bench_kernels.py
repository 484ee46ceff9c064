#!/usr/bin/env python3
"""Time the numba kernels against the numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--repeat 5] [--samples 200000]

Both backends are imported directly, so the result does not depend on
GAUSSNORM_DISABLE_NUMBA. Outputs are compared before timing.
"""

import argparse
import time

import numpy as np

from gaussnorm import _kern_numba as nb
from gaussnorm import _kern_numpy as npk


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--points", type=int, default=100_000)
    args = ap.parse_args()

    x = np.linspace(0.0, 8.0, args.points)
    scales = np.array([1.0, 0.7, 0.3])
    counts = np.array([3.0, 2.0, 5.0])
    factor = np.linalg.cholesky(np.eye(6) / 6 + 0.05)
    key = np.uint64(0x1234ABCD)

    cases = [
        ("phi_phic", lambda m: m.phi_phic(x)),
        ("supnorm_integrand", lambda m: m.supnorm_integrand(x, scales, counts)),
        ("counter_uniforms", lambda m: m.counter_uniforms(key, 0, args.samples * 6)),
        ("norm_block p=inf", lambda m: m.norm_block(key, 0, args.samples, factor, np.inf)),
        ("norm_block p=3", lambda m: m.norm_block(key, 0, args.samples, factor, 3.0)),
    ]

    print(f"{'kernel':<20} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8} {'max |diff|':>11}")
    for name, call in cases:
        a = call(npk)
        b = call(nb)  # also triggers compilation
        a = np.concatenate(a) if isinstance(a, tuple) else a
        b = np.concatenate(b) if isinstance(b, tuple) else b
        diff = float(np.max(np.abs(a - b)))
        t_np = best_of(lambda: call(npk), args.repeat)
        t_nb = best_of(lambda: call(nb), args.repeat)
        print(f"{name:<20} {1e3 * t_np:>11.2f} {1e3 * t_nb:>11.2f} {t_np / t_nb:>7.1f}x {diff:>11.2e}")


if __name__ == "__main__":
    main()
