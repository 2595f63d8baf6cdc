"""Compare the numba and numpy RK4 ramp integrators.

Usage: python3 benchmarks/bench_kernels.py [--batch 32] [--v 0.1] [--family cp_lattice]

Both backends integrate the same batch of quadratic ramps; the script
reports wall time per trajectory-step and the largest difference between
the two final-state arrays.
"""
import argparse
import time

import numpy as np

from nonabelian_qgt import _kernels
from nonabelian_qgt.models import FAMILIES, ModelSpec


def run(family, batch, v, dt):
    spec = ModelSpec(family, radius=1.0)
    rng = np.random.default_rng(7)
    npar = len(spec.param_names)
    starts = np.zeros((batch, 3))
    starts[:, :npar] = rng.uniform(0.2, 2.5, (batch, npar))
    dirs = np.zeros((batch, 3))
    dirs[:, 0] = 1.0
    psi0 = np.zeros((batch, 4), dtype=complex)
    psi0[:, 0] = 1.0
    t_final = np.pi / v
    nsteps = int(np.ceil(t_final / dt))
    args = (spec.kernel_args, spec.gammas, starts, dirs, psi0, v)
    # warm-up compiles (or loads from cache) outside the timed region
    _kernels.evolve_batch(*args, 4, 4 * dt, use_numba=True)
    timings = {}
    finals = {}
    for name, flag in (("numba", True), ("numpy", False)):
        t0 = time.perf_counter()
        finals[name] = _kernels.evolve_batch(*args, nsteps, t_final, use_numba=flag)
        timings[name] = time.perf_counter() - t0
    steps = batch * nsteps
    for name, sec in timings.items():
        print(f"{name:6s} {sec:8.3f} s  {1e6 * sec / steps:7.3f} us/trajectory-step")
    print(f"speedup numba/numpy: {timings['numpy'] / timings['numba']:.1f}x")
    print(f"max |psi_numba - psi_numpy| = {np.max(np.abs(finals['numba'] - finals['numpy'])):.2e}")


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--family", default="cp_lattice", choices=FAMILIES)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--v", type=float, default=0.1)
    p.add_argument("--dt", type=float, default=1e-3)
    a = p.parse_args()
    run(a.family, a.batch, a.v, a.dt)


if __name__ == "__main__":
    main()
