"""Throughput of the compiled and pure-numpy step kernels.

    python3 benchmarks/bench_kernels.py [--sizes 64 128 256] [--steps 200]

Prints million lattice-cell updates per second (MLUPS) per backend and the
max abs difference between the two after the timed steps.
"""

import argparse
import math
import time

import numpy as np

from hlbm import _accel
from hlbm.lattice import equilibrium, kernels


def _setup(n):
    rng = np.random.default_rng(0)
    solid = np.zeros((n, n), dtype=bool)
    solid[:, 0] = solid[:, -1] = True
    ux = 0.02 * rng.standard_normal((n, n))
    uy = 0.02 * rng.standard_normal((n, n))
    f = equilibrium(np.ones((n, n)), (ux, uy))
    f[:, solid] = 0.0
    varpi = np.full((n, n), 0.999)
    gx = np.full((n, n), 1e-6)
    gy = np.zeros((n, n))
    return np.ascontiguousarray(f), solid, varpi, gx, gy


def _time(step, n, steps, **extra):
    f, solid, varpi, gx, gy = _setup(n)
    buf = np.zeros_like(f)
    step(f, buf, solid, varpi, gx, gy, 1.0 / 0.8, True, False, **extra)  # warm-up / compile
    f, solid, varpi, gx, gy = _setup(n)
    t0 = time.perf_counter()
    for _ in range(steps):
        step(f, buf, solid, varpi, gx, gy, 1.0 / 0.8, True, False, **extra)
        f, buf = buf, f
    dt = time.perf_counter() - t0
    return n * n * steps / dt / 1e6, f


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--steps", type=int, default=200)
    args = ap.parse_args()
    print(f"{'n':>6} {'numpy':>10} {'numba':>10} {'parallel':>10} {'speed-up':>9} {'max diff':>10}")
    for n in args.sizes:
        blocked = kernels.blocked_links(np.pad(np.zeros((n, n - 2), bool), ((0, 0), (1, 1)), constant_values=True), True, False)
        np_rate, f_np = _time(kernels.step_numpy, n, args.steps, blocked=blocked)
        nb_rate = par_rate = math.nan
        diff = math.nan
        if _accel.NUMBA_AVAILABLE:
            nb_rate, f_nb = _time(kernels._step_serial, n, args.steps)
            par_rate, _ = _time(kernels._step_parallel, n, args.steps)
            diff = float(np.abs(f_nb - f_np).max())
        print(f"{n:>6} {np_rate:>10.2f} {nb_rate:>10.2f} {par_rate:>10.2f} {nb_rate / np_rate:>8.1f}x {diff:>10.2e}")


if __name__ == "__main__":
    main()
