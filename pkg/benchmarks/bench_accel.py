#!/usr/bin/env python3
"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_accel.py [--repeat 5]

Each kernel is warmed up once (so JIT compilation is excluded), then timed
``repeat`` times; the best wall time is reported.  The two outputs are also
compared so a speedup never hides a wrong answer.
"""
import argparse
import time

import numpy as np

from nhsim import _accel


def best_of(fn, args, repeat):
    fn(*args)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    n = 1024
    coef = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    pts = rng.uniform(-10.0, 10.0, 2048)
    dxi = 2 * np.pi / 20.0
    yield "trig_interp (1024 modes x 2048 pts)", (_accel.trig_interp_numpy, _accel.trig_interp_numba,
                                                  (coef, -dxi * n / 2, dxi, -10.0, pts))

    xs = np.linspace(-100.0, 100.0, 400)
    ys = np.linspace(-10.0, 10.0, 400)
    ys = ys[ys != 0]
    yield "ktilde_grid (400 x 400, gamma=1.5)", (_accel.ktilde_grid_numpy, _accel.ktilde_grid_numba,
                                                 (xs, ys, 1.5))

    u = rng.standard_normal(1 << 16) + 1j * rng.standard_normal(1 << 16)
    pot = rng.standard_normal(1 << 16)
    yield "phase_kick (65536 pts)", (_accel.phase_kick_numpy, _accel.phase_kick_numba, (u, pot, 5e-4))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':40s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, (f_np, f_nb, a) in cases(rng):
        t_np = best_of(f_np, a, args.repeat)
        t_nb = best_of(f_nb, a, args.repeat)
        diff = np.max(np.abs(np.asarray(f_np(*a)) - np.asarray(f_nb(*a))))
        print(f"{name:40s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:8.2f} {diff:10.2e}")


if __name__ == "__main__":
    main()
