#!/usr/bin/env python3
"""Benchmark the off-grid evaluation kernel: compiled vs numpy fallback.

The kernel dominates the characteristics machinery (flow-map evolution and
the identity checks evaluate fields at marker positions every stage), so
this is the loop the compiled extension exists for.  Also times one full
flow evolution end to end with each backend.

Usage: python benchmarks/bench_offgrid.py [--sizes 256,1024,4096] [--reps 5]
"""

import argparse
import time

import numpy as np

from chflow._kernels import _fallback

try:
    from chflow._kernels import _ext
except ImportError:
    _ext = None

from chflow.dynamics import Params, State, StepControl, integrate
from chflow.profiles import band_limited_noise, gaussian
from chflow.spectral import Grid


def time_call(fn, reps):
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernel(sizes, reps):
    print(f"{'n':>6} {'backend':>9} {'value only':>12} {'value+deriv':>12} {'speedup':>8}")
    for n in sizes:
        grid = Grid(20.0, n)
        f = band_limited_noise(grid, seed=1, kmax_frac=0.5)
        c = grid.half_coeffs(f.samples)
        re = np.ascontiguousarray(c.real)
        im = np.ascontiguousarray(c.imag)
        pts = np.random.default_rng(0).uniform(-20, 20, n)
        xi1 = np.pi / grid.L

        rows = {}
        backends = [("fallback", _fallback)] + ([("compiled", _ext)] if _ext else [])
        for name, impl in backends:
            t_val = time_call(lambda: impl.trig_eval(re, im, pts, xi1, False), reps)
            t_der = time_call(lambda: impl.trig_eval(re, im, pts, xi1, True), reps)
            rows[name] = (t_val, t_der)
        for name, (t_val, t_der) in rows.items():
            speedup = ""
            if name == "compiled":
                speedup = f"{rows['fallback'][1] / t_der:7.1f}x"
            print(f"{n:>6} {name:>9} {t_val * 1e3:>10.3f}ms {t_der * 1e3:>10.3f}ms {speedup:>8}")


def bench_flow(reps):
    from chflow import _kernels
    from chflow.characteristics import evolve_flow

    grid = Grid(20.0, 1024)
    ctrl = StepControl(cfl=1.0, dt_max=0.01, t_final=0.5)
    times = np.arange(0.0, 0.5001, 0.01)
    traj = integrate(
        State(0.0, gaussian(grid, 0.7, 2.0), gaussian(grid, 0.5, 1.5)),
        Params(b=2.0, kappa=1.0, alpha=0.0, r=1.0), ctrl, output_times=times,
    )
    print("\nflow-map evolution, n=1024, 50 steps:")
    saved = _kernels.trig_eval
    backends = [("fallback", _fallback.trig_eval)]
    if _ext is not None:
        backends.append(("compiled", _ext.trig_eval))
    try:
        for name, fn in backends:
            _kernels.trig_eval = fn
            t = time_call(lambda: evolve_flow(traj), max(1, reps // 2))
            print(f"  {name:>9}: {t:.3f}s")
    finally:
        _kernels.trig_eval = saved


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="256,1024,4096")
    parser.add_argument("--reps", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    if _ext is None:
        print("note: compiled kernel not available, timing fallback only")
    bench_kernel(sizes, args.reps)
    bench_flow(args.reps)


if __name__ == "__main__":
    main()
