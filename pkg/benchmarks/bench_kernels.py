"""Benchmark the numba kernels against the pure-numpy reference path.

Run:  python3 benchmarks/bench_kernels.py
Numba must be importable; the numpy path is always available (it is the
fallback selected by KRT_NO_NUMBA=1 at import time).
"""

import time

import numpy as np

from krtransport import kernels

SIZES = [1_000, 10_000, 100_000]
NMAX = 12
NTERMS = 40
K = 4
REPEATS = 5


def _time(fn, *args):
    fn(*args)  # warm up (includes JIT compilation for the numba path)
    best = float("inf")
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_legendre_table(m, rng):
    x = rng.uniform(-1, 1, size=m)
    rows = [("numpy", _time(kernels.legendre_table_numpy, x, NMAX))]
    if kernels.NUMBA_ENABLED:
        rows.append(("numba", _time(kernels.legendre_table_numba, x, NMAX)))
    return rows


def bench_poly_eval(m, rng):
    pts = rng.uniform(-1, 1, size=(m, K))
    tables = np.empty((m, K, NMAX + 1))
    for j in range(K):
        tables[:, j, :] = kernels.legendre_table_numpy(pts[:, j], NMAX)
    exps = rng.integers(0, NMAX + 1, size=(NTERMS, K)).astype(np.int64)
    coeffs = rng.normal(size=NTERMS)
    rows = [("numpy", _time(kernels.poly_eval_tables_numpy, tables, exps, coeffs))]
    if kernels.NUMBA_ENABLED:
        rows.append(
            ("numba", _time(kernels.poly_eval_tables_numba, tables, exps, coeffs))
        )
    return rows


def main():
    rng = np.random.Generator(np.random.Philox(0))
    print(f"numba enabled: {kernels.NUMBA_ENABLED}")
    for name, bench in [
        (f"legendre_table (nmax={NMAX})", bench_legendre_table),
        (f"poly_eval_tables ({NTERMS} terms, k={K})", bench_poly_eval),
    ]:
        print(f"\n{name}")
        for m in SIZES:
            rows = bench(m, rng)
            base = rows[0][1]
            for label, t in rows:
                speedup = f"  ({base / t:.1f}x)" if label == "numba" else ""
                print(f"  m={m:>7}  {label:>5}: {t * 1e3:8.3f} ms{speedup}")


if __name__ == "__main__":
    main()
