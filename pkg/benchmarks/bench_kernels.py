"""Benchmark the numba kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--n N] [--repeats R]

Covers the two enumeration-bound hot paths (per-word singular values over
Lambda(n), and the (u, w) minimax product grid) plus the connector pair scan.
Both backends are called directly; agreement is checked alongside timing.
The env flag COCYCLESPAN_BACKEND=numpy forces the fallback in normal use.
"""
import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from cocyclespan import E2, E3  # noqa: E402
from cocyclespan.kernels import (HAVE_NUMBA, minimax_grid2, products_level_numpy,  # noqa: E402
                                 qm_scan, word_singvals)


def timeit(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def row(label, t_np, t_nb, agree):
    speedup = t_np / t_nb if t_nb > 0 else float("inf")
    print(f"{label:34s} numpy {t_np * 1e3:9.2f} ms   numba {t_nb * 1e3:9.2f} ms   "
          f"speedup {speedup:5.2f}x   max|diff| {agree:.2e}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=16, help="word length for Lambda(n) sums")
    ap.add_argument("--grid", type=int, default=2000, help="angles per circle")
    ap.add_argument("--qm-n", type=int, default=6, help="pair-scan word length")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    if not HAVE_NUMBA:
        print("numba is not installed: only the numpy path is available")

    gens = E3().stacked()
    print(f"system E3 (ell=2, d=2), backends available: numpy"
          f"{', numba' if HAVE_NUMBA else ''}\n")

    # warm-up to exclude JIT compilation from the timings
    if HAVE_NUMBA:
        word_singvals(gens, 4, backend="numba")
        minimax_grid2(E2().stacked(), 64, backend="numba")
        u, l = products_level_numpy(gens, 2)
        ku, kl = products_level_numpy(gens, 1)
        qm_scan(u, l, ku, kl, backend="numba")

    t_np, out_np = timeit(lambda: word_singvals(gens, args.n, backend="numpy"),
                          args.repeats)
    if HAVE_NUMBA:
        t_nb, out_nb = timeit(lambda: word_singvals(gens, args.n, backend="numba"),
                              args.repeats)
        diff = max(np.abs(out_np[0] - out_nb[0]).max(),
                   np.abs(out_np[1] - out_nb[1]).max())
        row(f"word_singvals n={args.n} ({2**args.n} words)", t_np, t_nb, diff)

    kmats = E2().stacked()
    t_np, out_np = timeit(lambda: minimax_grid2(kmats, args.grid, backend="numpy"),
                          args.repeats)
    if HAVE_NUMBA:
        t_nb, out_nb = timeit(lambda: minimax_grid2(kmats, args.grid, backend="numba"),
                              args.repeats)
        row(f"minimax_grid2 G={args.grid}", t_np, t_nb, abs(out_np[0] - out_nb[0]))

    units, logs = products_level_numpy(gens, args.qm_n)
    ku, kl = products_level_numpy(gens, 1)
    t_np, out_np = timeit(lambda: qm_scan(units, logs, ku, kl, backend="numpy"),
                          args.repeats)
    if HAVE_NUMBA:
        t_nb, out_nb = timeit(lambda: qm_scan(units, logs, ku, kl, backend="numba"),
                              args.repeats)
        row(f"qm_scan n={args.qm_n} ({4**args.qm_n} pairs)", t_np, t_nb,
            abs(out_np[0] - out_nb[0]))


if __name__ == "__main__":
    main()
