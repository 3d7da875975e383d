"""Benchmark the compiled chain kernel against the pure-Python fallback.

Usage: python benchmarks/bench_chain.py [steps]
"""

import sys
import time

import numpy as np

from ffexact import CountTable, build_design, fit_main_effect, minimal_markov_basis
from ffexact import _chain_py
from ffexact import sampler


def main():
    steps = int(sys.argv[1]) if len(sys.argv) > 1 else 500_000
    p = 5
    y = np.array([2, 0, 1, 1, 0, 1, 0, 0, 2, 0, 0, 0, 0, 1, 0, 0])
    y0 = CountTable(p=p, y=y)
    fit = fit_main_effect(y0, build_design(p))
    logmu = np.log(fit.mu)
    moves = np.array([mv.dense() for mv in minimal_markov_basis(p).moves])

    rng = np.random.default_rng(0)
    midx = rng.integers(0, len(moves), steps, dtype=np.int64)
    signs = rng.integers(0, 2, steps, dtype=np.int64) * 2 - 1
    logu = np.log(rng.random(steps))
    args = (y.astype(np.int64), moves, 0, logmu, 10.0, 1e-9,
            midx, signs, logu, steps // 10, 1)

    kernels = [("python", _chain_py)]
    if sampler._compiled is not None:
        kernels.append(("cython", sampler._compiled))

    results = {}
    for name, mod in kernels:
        t0 = time.perf_counter()
        ind, tv, acc = mod.run_kernel(*args)
        dt = time.perf_counter() - t0
        results[name] = (ind, tv, acc, dt)
        print(f"{name:>7}: {steps} steps in {dt:.3f}s "
              f"({steps / dt / 1e6:.2f} Msteps/s), accepted={acc}")

    if len(results) == 2:
        ip, tp, ap, dp = results["python"]
        ic, tc, ac, dc = results["cython"]
        same = ap == ac and np.array_equal(ip, ic) and np.array_equal(tp, tc)
        print(f"bit-identical outputs: {same}")
        print(f"speedup: {dp / dc:.1f}x")


if __name__ == "__main__":
    main()
