"""Compare the compiled and pure-Python RK4 kernels on the 5-mode reset generator.

    python3 benchmarks/bench_rk4.py [--steps N] [--repeat R]

Prints per-step wall time for each available backend, the speed-up, and the
maximum difference between the two final states.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from phonon_reset import kernels
from phonon_reset.dynamics import _ReducedSystem, collapse_operators, default_noise, reachable_support
from phonon_reset.model import default_device
from phonon_reset.protocol import build_reset_schedule, initial_state


def setup():
    dev, noise = default_device(), default_noise()
    sched = build_reset_schedule(dev, noise, 4)
    rho0 = initial_state(sched, dev, noise)
    collapse = collapse_operators(dev, noise)
    hams = [s.hamiltonian.matrix for s in sched.segments]
    support = reachable_support(rho0.matrix, hams, collapse)
    system = _ReducedSystem(support, rho0.dim, collapse)
    gen = system.generator(sched.segments[1].hamiltonian)
    return gen, system.to_vec(rho0.matrix), system


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    gen, y0, system = setup()
    nnz = len(gen[3]) + len(gen[6]) + len(gen[0])
    print(f"reduced state size {len(y0)}, generator entries {nnz}, steps {args.steps}")
    h = 5e-4
    timings, finals = {}, {}
    for name, fn in sorted(kernels.BACKENDS.items()):
        fn(*gen, y0.copy(), h, 5)  # warm-up
        best = np.inf
        for _ in range(args.repeat):
            y = y0.copy()
            t0 = time.perf_counter()
            fn(*gen, y, h, args.steps)
            best = min(best, time.perf_counter() - t0)
        timings[name] = best / args.steps
        finals[name] = y
        print(f"{name:>7}: {timings[name] * 1e3:.3f} ms/step")
    if len(timings) == 2:
        print(f"speed-up (python / cython): {timings['python'] / timings['cython']:.2f}x")
        print(f"max |difference|: {np.abs(finals['python'] - finals['cython']).max():.3e}")
    else:
        print("compiled kernel not built; only the Python backend is available")


if __name__ == "__main__":
    main()
