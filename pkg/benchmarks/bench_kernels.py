"""Timing comparison of the compiled kernels against the pure-Python ones.

Run:  python benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from cwphase import _kernels_py

try:
    from cwphase import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

LN_UPS = math.log(12.0)
LN_TOL = math.log(1e-15)


def bench_cumulant_scan(mod, repeats=5):
    xs = np.linspace(-10.0, 5.0, 400)
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        acc = 0.0
        for x in xs:
            acc += mod.cumulant_scan(float(x), 7.2, LN_UPS, LN_TOL, 16, 20000)[0]
        best = min(best, time.perf_counter() - t0)
    return best, acc


def bench_log_conv(mod, repeats=5):
    rng = np.random.default_rng(7)
    log_pi = rng.normal(size=65) - 0.05 * np.arange(65.0) ** 2
    best = math.inf
    for _ in range(repeats):
        c = log_pi.copy()
        t0 = time.perf_counter()
        for _ in range(63):
            c = mod.log_conv_step(c, log_pi)
        best = min(best, time.perf_counter() - t0)
    return best, float(c[len(c) // 2])


def main():
    rows = []
    for name, fn in (("cumulant_scan x400", bench_cumulant_scan),
                     ("log_conv_step chain N=64", bench_log_conv)):
        t_py, check_py = fn(_kernels_py)
        if _kernels_c is not None:
            t_c, check_c = fn(_kernels_c)
            assert abs(check_c - check_py) < 1e-9 * max(1.0, abs(check_py))
            rows.append((name, t_py, t_c, t_py / t_c))
        else:
            rows.append((name, t_py, None, None))

    print(f"{'kernel':<28} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, t_py, t_c, speed in rows:
        if t_c is None:
            print(f"{name:<28} {t_py * 1e3:>8.2f}ms {'n/a':>10} {'n/a':>8}")
        else:
            print(f"{name:<28} {t_py * 1e3:>8.2f}ms {t_c * 1e3:>8.2f}ms {speed:>7.1f}x")


if __name__ == "__main__":
    main()
