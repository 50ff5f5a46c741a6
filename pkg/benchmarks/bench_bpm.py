"""Benchmark the beam-propagation z-stepping loop: compiled vs pure.

The hot loop (tridiagonal Crank-Nicolson step repeated ~2500 times per
50 um run) ships as a Cython extension with a pure-NumPy/SciPy fallback.
This script times both on the same workload and checks that they agree
to machine precision.

Run:  python benchmarks/bench_bpm.py
"""

import importlib
import os
import sys
import time

import numpy as np

from openwg import kernels, oracle
from openwg.star import Geometry


def run_once(z_max: float = 50.0):
    geom = Geometry(0.23, 10.0, 0.15)
    grid = oracle.default_grid(geom, z_max=z_max)
    t0 = time.perf_counter()
    fm = oracle.propagate_field(geom, grid, sample_every=5)
    return time.perf_counter() - t0, fm


def with_backend(pure: bool):
    os.environ["OPENWG_PURE"] = "1" if pure else ""
    importlib.reload(kernels)
    importlib.reload(oracle)
    return kernels.BACKEND


def main() -> int:
    results = {}
    for pure in (False, True):
        backend = with_backend(pure)
        run_once(z_max=5.0)  # warm-up
        times = []
        for _ in range(3):
            dt, fm = run_once()
            times.append(dt)
        results[backend] = (min(times), fm.values)
        print(f"{backend:8s}  best of 3: {min(times)*1e3:8.1f} ms")

    names = list(results)
    if len(names) == 2:
        a, b = results[names[0]], results[names[1]]
        diff = float(np.max(np.abs(a[1] - b[1])))
        print(f"max |field difference| between backends: {diff:.3e}")
        print(f"speedup ({names[1]} / {names[0]}): "
              f"{b[0] / a[0]:.1f}x")
        if diff > 1e-10:
            print("BACKENDS DISAGREE", file=sys.stderr)
            return 1
    else:
        print("compiled backend unavailable; timed pure path only")
    return 0


if __name__ == "__main__":
    sys.exit(main())
