#!/usr/bin/env python3
"""Benchmark the tape backends (numpy fallback vs compiled kernel).

The workload is the real hot path: the pulled-back mollified integrand of a
surface current evaluated over quadrature-sized point batches, plus the small
batches typical of Newton root-finding inside the delta collapse.

Run:  python benchmarks/bench_tape.py
"""

from __future__ import annotations

import time

import numpy as np

from deltaforms import box_chain, form_from_terms, parse, surface_current
from deltaforms.chains import _mollified_form
from deltaforms.exterior import pullback_through
from deltaforms.kernel import run_tape_compiled, run_tape_numpy, _compiled
from deltaforms.tape import compile_tape


def _workload_tape():
    l2 = form_from_terms(
        2,
        {(1, 2): parse("1 + 0.3*sin(t)"), (0, 1): parse("x*y/4"), (0, 2): parse("t*z")},
        twisted=True,
    )
    j = surface_current(l2, parse("z - 0.25*t + 0.1*x"))
    chain = box_chain(t=0.35, x=(-1, 1), y=(-1, 1), z=(-1, 1))
    moll = _mollified_form(j, 0.0125)
    pulled = pullback_through(moll, chain.components, 3)
    g = pulled.coeff((0, 1, 2))
    return compile_tape([g])


def _time(fn, tape, pts, repeats=7):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(tape, pts)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    tape = _workload_tape()
    print(f"workload tape: {tape.instrs.shape[0]} instructions, "
          f"{len(tape.out_regs)} output(s)")
    if _compiled is None:
        print("compiled kernel not built; only the numpy fallback is available")

    rng = np.random.default_rng(42)
    header = f"{'N points':>10} | {'numpy':>10} | {'compiled':>10} | speedup"
    print(header)
    print("-" * len(header))
    for n in (256, 4096, 65536, 1048576):
        pts = rng.uniform(0.05, 0.95, size=(n, 4))
        t_np = _time(run_tape_numpy, tape, pts)
        if _compiled is not None:
            t_cy = _time(run_tape_compiled, tape, pts)
            print(f"{n:>10} | {t_np * 1e3:>8.2f}ms | {t_cy * 1e3:>8.2f}ms | "
                  f"{t_np / t_cy:>6.2f}x")
        else:
            print(f"{n:>10} | {t_np * 1e3:>8.2f}ms | {'-':>10} |    -")

    # agreement spot check
    pts = rng.uniform(0.05, 0.95, size=(10000, 4))
    a = run_tape_numpy(tape, pts)
    if _compiled is not None:
        b = run_tape_compiled(tape, pts)
        print(f"max |numpy - compiled| on 10k points: {np.max(np.abs(a - b)):.3e}")


if __name__ == "__main__":
    main()
