"""Orthonormal tensor-Legendre basis and sparse polynomials.

The 1d basis is L_n = sqrt(2n+1) P_n, orthonormal in L^2([-1,1]; mu) with
mu the uniform probability measure. Multiindices are tuples of nonnegative
ints with trailing zeros trimmed; tensor basis functions are products of
1d factors.
"""

import math
from dataclasses import dataclass

import numpy as np

from .kernels import legendre_table, poly_eval_tables
from .quadrature import TensorGrid, tensor_grid


def canon(nu) -> tuple:
    """Canonical multiindex: tuple with trailing zeros trimmed."""
    nu = tuple(int(v) for v in nu)
    if any(v < 0 for v in nu):
        raise ValueError(f"negative exponent in multiindex {nu}")
    while nu and nu[-1] == 0:
        nu = nu[:-1]
    return nu


def padded(nu, k: int) -> tuple:
    return tuple(nu) + (0,) * (k - len(nu))


def grlex_key(nu):
    return (sum(nu), tuple(nu))


def legendre_1d(n: int, x):
    """L_n(x) for scalar or array x."""
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    vals = legendre_table(arr, n)[:, n]
    return float(vals[0]) if np.isscalar(x) or np.ndim(x) == 0 else vals


def sup_norm_bound(nu) -> float:
    """prod_j (1+2 nu_j)^(1/2), the sup norm of the tensor basis function."""
    return math.prod(math.sqrt(1.0 + 2.0 * v) for v in nu)


@dataclass(frozen=True)
class SparsePolynomial:
    """Sparse polynomial in the orthonormal Legendre basis on [-1,1]^dim."""

    dim: int
    terms: dict  # canonical multiindex tuple -> float coefficient

    def __post_init__(self):
        for nu in self.terms:
            if len(nu) > self.dim:
                raise ValueError(f"index {nu} exceeds dimension {self.dim}")

    @property
    def max_degree(self) -> int:
        return max((max(nu) for nu in self.terms if nu), default=0)

    def max_degree_per_dim(self) -> list[int]:
        out = [0] * self.dim
        for nu in self.terms:
            for j, v in enumerate(nu):
                out[j] = max(out[j], v)
        return out

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        """Evaluate at points x of shape (m, dim) or a single point (dim,)."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        if pts.shape[1] != self.dim:
            raise ValueError(f"expected dimension {self.dim}, got {pts.shape[1]}")
        vals = self._eval_batch(pts)
        return float(vals[0]) if single else vals

    def _eval_batch(self, pts: np.ndarray) -> np.ndarray:
        if not self.terms:
            return np.zeros(pts.shape[0])
        items = self.sorted_terms()
        exps = np.array([padded(nu, self.dim) for nu, _ in items], dtype=np.int64)
        coeffs = np.array([c for _, c in items])
        nmax = int(exps.max(initial=0))
        tables = np.empty((pts.shape[0], self.dim, nmax + 1))
        for j in range(self.dim):
            tables[:, j, :] = legendre_table(pts[:, j], nmax)
        return poly_eval_tables(tables, exps, coeffs)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "terms": [
                {"nu": list(nu), "coeff": c} for nu, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SparsePolynomial":
        return cls(
            dim=int(obj["dim"]),
            terms={canon(t["nu"]): float(t["coeff"]) for t in obj["terms"]},
        )


def zero_polynomial(dim: int) -> SparsePolynomial:
    return SparsePolynomial(dim, {})


def default_projection_grid(index_set, margin: int = 10) -> TensorGrid:
    """Per-dimension order = max degree in the set + margin."""
    maxdeg = [0] * index_set.k
    for nu in index_set.members:
        for j, v in enumerate(nu):
            maxdeg[j] = max(maxdeg[j], v)
    return tensor_grid([m + margin for m in maxdeg])


def project(f, index_set, grid: TensorGrid, min_margin: int = 1) -> SparsePolynomial:
    """Quadrature projection of f onto span{L_nu : nu in index_set}.

    f maps (m, k) points to (m,) values. Each grid dimension must have
    order >= (max degree of that coordinate in the set) + min_margin,
    otherwise the coefficients of the top-degree terms alias.
    """
    k = index_set.k
    if grid.d != k:
        raise ValueError(f"grid dimension {grid.d} != index set dimension {k}")
    members = list(index_set.members)
    if not members:
        return zero_polynomial(k)
    maxdeg = [0] * k
    for nu in members:
        for j, v in enumerate(nu):
            maxdeg[j] = max(maxdeg[j], v)
    for j, rule in enumerate(grid.rules):
        if rule.n < maxdeg[j] + min_margin:
            raise ValueError(
                f"grid order {rule.n} in dim {j} below degree "
                f"{maxdeg[j]} + margin {min_margin}"
            )
    pts, w = grid.points_weights()
    vals = np.asarray(f(pts), dtype=np.float64)
    if not np.all(np.isfinite(vals)):
        raise ValueError("projection integrand non-finite on grid nodes")
    nmax = max(maxdeg)
    tables = np.empty((pts.shape[0], k, nmax + 1))
    for j in range(k):
        tables[:, j, :] = legendre_table(pts[:, j], nmax)
    fw = vals * w
    terms = {}
    for nu in members:
        basis = np.ones(pts.shape[0])
        for j, v in enumerate(nu):
            if v > 0:
                basis = basis * tables[:, j, v]
        terms[nu] = float(fw @ basis)
    return SparsePolynomial(k, terms)


def antiderivative_in_last(p: SparsePolynomial) -> SparsePolynomial:
    """q with d/dx_k q = p and q(., -1) = 0, exactly in the Legendre basis.

    Uses int P_n = (P_{n+1} - P_{n-1}) / (2n+1), which vanishes at -1 for
    n >= 1; the n = 0 term integrates to x + 1 = L_0 + L_1/sqrt(3).
    """
    k = p.dim
    out: dict[tuple, float] = {}

    def add(nu, c):
        nu = canon(nu)
        out[nu] = out.get(nu, 0.0) + c

    for nu, c in p.terms.items():
        full = padded(nu, k)
        head, n = full[:-1], full[-1]
        if n == 0:
            add(head + (0,), c)
            add(head + (1,), c / math.sqrt(3.0))
        else:
            s = math.sqrt(2.0 * n + 1.0)
            add(head + (n + 1,), c / (s * math.sqrt(2.0 * n + 3.0)))
            add(head + (n - 1,), -c / (s * math.sqrt(2.0 * n - 1.0)))
    out = {nu: c for nu, c in out.items() if c != 0.0}
    return SparsePolynomial(k, out)
