"""Benchmark the compiled Lanczos kernel against the numpy fallback.

Times the raw per-iteration kernel and an end-to-end charging trace on a
production-size problem. Run from the repo root:

    python benchmarks/bench_lanczos.py            # default size
    python benchmarks/bench_lanczos.py --n-a 3 --n-b 3 --n-ph 12   # smaller
"""

import argparse
import time

import numpy as np

from qbattery import (
    ModelParams,
    PropagatorConfig,
    TimeGrid,
    build_basis,
    build_total,
    initial_state,
    propagate_to,
)
from qbattery import kernels


def time_kernel(impl, h, v, n_iter):
    w = np.empty_like(v)
    impl(h, v, v, 0.0, w)  # warm up
    t0 = time.perf_counter()
    for _ in range(n_iter):
        impl(h, v, v, 0.0, w)
    return (time.perf_counter() - t0) / n_iter


def time_trace(h, psi0, t_max, monkeyed_impl):
    saved = kernels.lanczos_iteration
    kernels.lanczos_iteration = monkeyed_impl
    try:
        t0 = time.perf_counter()
        cfg = PropagatorConfig()
        psi = psi0
        for _ in range(int(t_max / 0.05)):
            psi = propagate_to(h, psi, 0.05, cfg)
        return time.perf_counter() - t0
    finally:
        kernels.lanczos_iteration = saved


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-a", type=int, default=5)
    ap.add_argument("--n-b", type=int, default=5)
    ap.add_argument("--n-ph", type=int, default=30)
    ap.add_argument("--iters", type=int, default=200)
    ap.add_argument("--t-max", type=float, default=2.0)
    args = ap.parse_args()

    p = ModelParams(n_a=args.n_a, n_b=args.n_b, n_ph=args.n_ph)
    basis = build_basis(p)
    h = build_total(basis)
    psi0 = initial_state(basis)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(basis.dimension) + 1j * rng.standard_normal(basis.dimension)
    v /= np.linalg.norm(v)

    print(f"dimension {basis.dimension}, nnz {h.nnz}, extension built: "
          f"{kernels.compiled_available()}")

    t_py = time_kernel(kernels._lanczos_iteration_py, h, v, args.iters)
    print(f"lanczos iteration, python fallback : {t_py * 1e3:8.3f} ms")
    if kernels.compiled_available():
        t_c = time_kernel(kernels._lanczos_iteration_compiled, h, v, args.iters)
        print(f"lanczos iteration, compiled        : {t_c * 1e3:8.3f} ms   "
              f"({t_py / t_c:.2f}x)")

    tr_py = time_trace(h, psi0, args.t_max, kernels._lanczos_iteration_py)
    print(f"trace to t={args.t_max}, python fallback  : {tr_py:8.3f} s")
    if kernels.compiled_available():
        tr_c = time_trace(h, psi0, args.t_max, kernels._lanczos_iteration_compiled)
        print(f"trace to t={args.t_max}, compiled         : {tr_c:8.3f} s   "
              f"({tr_py / tr_c:.2f}x)")


if __name__ == "__main__":
    main()
