"""Hot numeric kernels with numba acceleration and a pure-numpy fallback.

Set the environment variable ``KRT_NO_NUMBA=1`` before import to force the
numpy code path (useful for debugging and for the benchmark in
``benchmarks/bench_kernels.py``). Both implementations are always importable
as ``*_numpy`` / ``*_numba``; the dispatched names (``legendre_table``,
``poly_eval_tables``) pick one at import time.
"""

import os

import numpy as np

__all__ = [
    "NUMBA_ENABLED",
    "legendre_table",
    "legendre_table_numpy",
    "poly_eval_tables",
    "poly_eval_tables_numpy",
]


def legendre_table_numpy(x: np.ndarray, nmax: int) -> np.ndarray:
    """Orthonormal Legendre values L_0(x)..L_nmax(x), shape (len(x), nmax+1).

    L_n = sqrt(2n+1) * P_n with P_n the classical Legendre polynomial, so
    that integral of L_n^2 against the uniform probability measure on
    [-1, 1] equals 1.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((x.shape[0], nmax + 1))
    out[:, 0] = 1.0
    if nmax >= 1:
        out[:, 1] = x
    for n in range(1, nmax):
        # classical three-term recurrence on the unnormalized P_n
        out[:, n + 1] = ((2 * n + 1) * x * out[:, n] - n * out[:, n - 1]) / (n + 1)
    out *= np.sqrt(2.0 * np.arange(nmax + 1) + 1.0)
    return out


def poly_eval_tables_numpy(
    tables: np.ndarray, exps: np.ndarray, coeffs: np.ndarray
) -> np.ndarray:
    """Evaluate a sparse tensor-Legendre polynomial from per-dim value tables.

    tables: (npts, k, nmax+1) with tables[i, j, n] = L_n(x_i_j)
    exps:   (nterms, k) integer exponents
    coeffs: (nterms,)
    returns (npts,) values sum_t coeffs[t] * prod_j tables[:, j, exps[t, j]]
    """
    npts = tables.shape[0]
    out = np.zeros(npts)
    for t in range(exps.shape[0]):
        term = np.full(npts, coeffs[t])
        for j in range(exps.shape[1]):
            n = exps[t, j]
            if n > 0:
                term = term * tables[:, j, n]
        out += term
    return out


NUMBA_ENABLED = os.environ.get("KRT_NO_NUMBA", "") not in ("1", "true", "yes")

if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

if NUMBA_ENABLED:

    @njit(cache=True)
    def legendre_table_numba(x, nmax):
        npts = x.shape[0]
        out = np.empty((npts, nmax + 1))
        for i in range(npts):
            out[i, 0] = 1.0
        if nmax >= 1:
            for i in range(npts):
                out[i, 1] = x[i]
        for n in range(1, nmax):
            a = 2.0 * n + 1.0
            for i in range(npts):
                out[i, n + 1] = (a * x[i] * out[i, n] - n * out[i, n - 1]) / (n + 1.0)
        for n in range(nmax + 1):
            s = np.sqrt(2.0 * n + 1.0)
            for i in range(npts):
                out[i, n] *= s
        return out

    @njit(cache=True)
    def poly_eval_tables_numba(tables, exps, coeffs):
        npts = tables.shape[0]
        nterms = exps.shape[0]
        k = exps.shape[1]
        out = np.zeros(npts)
        for i in range(npts):
            acc = 0.0
            for t in range(nterms):
                term = coeffs[t]
                for j in range(k):
                    n = exps[t, j]
                    if n > 0:
                        term *= tables[i, j, n]
                acc += term
            out[i] = acc
        return out

    def legendre_table(x, nmax):
        return legendre_table_numba(np.ascontiguousarray(x, dtype=np.float64), nmax)

    def poly_eval_tables(tables, exps, coeffs):
        return poly_eval_tables_numba(
            np.ascontiguousarray(tables),
            np.ascontiguousarray(exps, dtype=np.int64),
            np.ascontiguousarray(coeffs, dtype=np.float64),
        )

else:
    legendre_table = legendre_table_numpy
    poly_eval_tables = poly_eval_tables_numpy
