#!/usr/bin/env python3
"""Benchmark: compiled pivot kernel vs the numpy fallback.

The dense-tableau pivot dominates solve time, so this is the number that
matters. Two views: raw eliminations on representative tableau sizes, and a
cold LP solve of a full-size daily model through each backend.

Usage: python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

import flexsched._kernels as kernels
import flexsched._kernels._pykernels as pure
from flexsched.model_builder import build_baseline
from flexsched.plant import builtin_config
from flexsched.prices import synth_prices
from flexsched.solver.simplex import BoundedSimplex


def bench_eliminate(eliminate, rows, cols, pivots=60, seed=0):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(rows, cols))
    scratch = np.empty_like(M)
    # touch a deterministic pivot walk; keep pivots well-scaled
    t0 = time.perf_counter()
    for k in range(pivots):
        r = (k * 7919) % (rows - 1)
        q = (k * 104729) % (cols - 1)
        if abs(M[r, q]) < 1e-3:
            M[r, q] = 1.0 + 0.1 * k
        eliminate(M, r, q, scratch)
    wall = time.perf_counter() - t0
    return wall / pivots


def bench_lp(backend_eliminate):
    config = builtin_config("cement")
    store = synth_prices("match-moments", {"mean": 80.0, "std": 30.0}, days=8, seed=3)
    prices = store.window(store.first_date, 8)
    model, _ = build_baseline(config, prices)
    A, rels, b, c, lo, up, _ = model.dense()
    saved = kernels.eliminate
    kernels.eliminate = backend_eliminate
    try:
        eng = BoundedSimplex(A, rels, b, c, lo, up)
        t0 = time.perf_counter()
        res = eng.solve()
        wall = time.perf_counter() - t0
    finally:
        kernels.eliminate = saved
    return wall, res.objective, res.iterations


def main():
    if not kernels.HAVE_COMPILED:
        print("compiled kernel unavailable; showing the numpy fallback only")
    backends = [("numpy", pure.eliminate)]
    if kernels.HAVE_COMPILED:
        backends.insert(0, ("compiled", kernels.eliminate))

    print("== raw pivot (seconds per elimination) ==")
    for rows, cols in ((800, 1700), (1340, 2690)):
        line = f"{rows}x{cols}:"
        times = {}
        for name, fn in backends:
            times[name] = bench_eliminate(fn, rows, cols)
            line += f"  {name} {times[name]*1e3:7.3f} ms"
        if len(times) == 2:
            line += f"  speedup x{times['numpy'] / times['compiled']:.2f}"
        print(line)

    print("== cold LP solve, full-size daily model ==")
    results = {}
    for name, fn in backends:
        wall, objective, iters = bench_lp(fn)
        results[name] = wall
        print(f"{name:9s} {wall:6.2f} s   objective {objective:.3f}   {iters} pivots")
    if len(results) == 2:
        print(f"speedup x{results['numpy'] / results['compiled']:.2f}")


if __name__ == "__main__":
    main()
