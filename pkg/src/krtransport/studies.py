"""Experiment drivers: convergence sweeps, dimension truncation, posterior demo.

Randomness comes from numpy's counter-based Philox generator seeded from
the config, so reruns with identical config and seed are bitwise
reproducible. Wall-clock timing is injected (``clock``): by default the
wall_ms column is 0 so that output files are deterministic; pass
``time.perf_counter`` to record real timings.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .approx import (
    ApproxTransport,
    InverseTriangularMap,
    build_approx_transport,
    fit_component,
    projection_grid,
)
from .density import Density, conditional, gaussian_posterior, linear_density, uniform
from .indexsets import WeightVector, enumerate_lambda, xi_from_anisotropy
from .metrics import DistanceReport, pullback_distance
from .quadrature import integrate, uniform_grid
from .transport import ExactTransport

ERROR_FLOOR = 1e-12
CSV_HEADER = "epsilon,N_eps,k_eff,sup_err_T,sup_err_dT,hellinger,tv,kl,w1,w1_exact,wall_ms"


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class SweepRecord:
    epsilon: float
    n_eps: int
    per_k_cards: tuple
    k_eff: int
    sup_err_T: float
    sup_err_dT: float
    distances: DistanceReport | None
    wall_ms: float

    def csv_row(self) -> str:
        d = self.distances
        cols = [
            repr(self.epsilon),
            str(self.n_eps),
            str(self.k_eff),
            repr(self.sup_err_T),
            repr(self.sup_err_dT),
            repr(d.hellinger) if d else "nan",
            repr(d.tv) if d else "nan",
            repr(d.kl) if d else "nan",
            repr(d.w1) if d else "nan",
            (str(d.w1_exact).lower()) if d else "false",
            repr(self.wall_ms),
        ]
        return ",".join(cols)

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "N_eps": self.n_eps,
            "per_k_cards": list(self.per_k_cards),
            "k_eff": self.k_eff,
            "sup_err_T": self.sup_err_T,
            "sup_err_dT": self.sup_err_dT,
            "distances": self.distances.to_json() if self.distances else None,
            "wall_ms": self.wall_ms,
        }


@dataclass(frozen=True)
class RateFit:
    model: str  # "exponential": log err vs N^(1/d); "algebraic": log err vs log N
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    status: str = "ok"

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
            "status": self.status,
        }


def fit_rate(n_eps, errors, model: str, d: int = 1) -> RateFit:
    """Least-squares rate fit over records with error above the floor."""
    n_eps = np.asarray(n_eps, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    keep = (errors > ERROR_FLOOR) & (n_eps > 0)
    n_eps, errors = n_eps[keep], errors[keep]
    if len(errors) < 3:
        return RateFit(model, math.nan, math.nan, math.nan, len(errors),
                       status="degenerate")
    if model == "exponential":
        x = n_eps ** (1.0 / d)
    elif model == "algebraic":
        x = np.log(n_eps)
    else:
        raise ValueError(f"unknown rate model {model!r}")
    y = np.log(errors)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return RateFit(model, float(slope), float(intercept), r2, len(errors))


def _sample_points(rng: np.random.Generator, k: int, n_cloud: int,
                   comp=None) -> np.ndarray:
    """Seeded uniform cloud, plus the component's projection-grid nodes."""
    pts = rng.uniform(-1.0, 1.0, size=(n_cloud, k))
    if comp is not None and comp.lam is not None and comp.lam.members:
        grid_pts, _ = projection_grid(comp.lam).points_weights()
        pts = np.concatenate([pts, grid_pts], axis=0)
    return pts


def component_sup_errors(exact: ExactTransport, approx: ApproxTransport,
                         k: int, pts: np.ndarray):
    """(sup |T_k - Tt_k|, sup |dT_k - dTt_k|) over the sample points."""
    t_ex = exact.component(k, pts)
    t_ap = approx.component(k, pts)
    d_ex = exact.diag_deriv(k, pts)
    d_ap = approx.diag_deriv(k, pts)
    return (
        float(np.max(np.abs(t_ex - t_ap))),
        float(np.max(np.abs(d_ex - d_ap))),
    )


def _distance_grid_order(d: int) -> int:
    return 30 if d <= 3 else 15


def convergence_study(
    rho: Density,
    pi: Density,
    xi: WeightVector,
    eps_list,
    seed: int = 0,
    n_cloud: int = 2048,
    distance_grid_order: int | None = None,
    with_distances: bool = True,
    clock=None,
):
    """Exponential-rate sweep at fixed dimension.

    Returns (records, rate_fit). For each epsilon the approximate
    transport is fitted, sup errors against the exact transport are
    sampled, and distances between the induced measure and the target
    are computed on a shared tensor grid.
    """
    d = rho.d
    exact = ExactTransport(reference=rho, target=pi)
    order = distance_grid_order or _distance_grid_order(d)
    grid = uniform_grid(order, d) if with_distances else None
    records = []
    for eps in eps_list:
        t0 = clock() if clock else 0.0
        rng = rng_from_seed(seed)
        approx = build_approx_transport(rho, pi, xi, eps, exact=exact)
        cards = tuple(len(c.lam) for c in approx.components)
        k_eff = max((k + 1 for k in range(d) if cards[k] > 0), default=0)
        sup_t = sup_dt = 0.0
        for k in range(1, d + 1):
            pts = _sample_points(rng, k, n_cloud, approx.components[k - 1])
            et, edt = component_sup_errors(exact, approx, k, pts)
            sup_t = max(sup_t, et)
            sup_dt = max(sup_dt, edt)
        dist = (
            pullback_distance(InverseTriangularMap(approx), rho, pi, grid)
            if with_distances
            else None
        )
        wall = ((clock() - t0) * 1000.0) if clock else 0.0
        records.append(
            SweepRecord(
                epsilon=float(eps),
                n_eps=approx.n_eps,
                per_k_cards=cards,
                k_eff=k_eff,
                sup_err_T=sup_t,
                sup_err_dT=sup_dt,
                distances=dist,
                wall_ms=wall,
            )
        )
    errs = [r.sup_err_T for r in records]
    if max(errs, default=0.0) <= ERROR_FLOOR:
        fit = RateFit("exponential", math.nan, math.nan, math.nan, 0,
                      status="degenerate")
    else:
        fit = fit_rate([r.n_eps for r in records], errs, "exponential", d=d)
    return records, fit


def truncation_study(
    amplitude: float,
    s: float,
    d_max: int,
    eps_list,
    alpha: float = 1.0,
    seed: int = 0,
    n_cloud: int = 512,
    clock=None,
):
    """Dimension-truncation sweep: linear target with c_j = amplitude * j^-s.

    Components with empty index sets are the identity; the effective
    dimension k_eff is the largest k with a nonempty set. Errors are the
    aggregate sums over k <= d_max of sampled sup norms; the fit is
    algebraic (log error vs log N).
    """
    c = amplitude * np.arange(1, d_max + 1, dtype=np.float64) ** (-float(s))
    pi = linear_density(c)
    rho = uniform(d_max)
    exact = ExactTransport(reference=rho, target=pi)
    xi = xi_from_anisotropy(pi.anisotropy, alpha)
    records = []
    for eps in eps_list:
        t0 = clock() if clock else 0.0
        rng = rng_from_seed(seed)
        approx = build_approx_transport(rho, pi, xi, eps, exact=exact, d=d_max)
        cards = tuple(len(comp.lam) for comp in approx.components)
        k_eff = max((k + 1 for k, comp in enumerate(approx.components)
                     if cards[k] > 0), default=0)
        pts = rng.uniform(-1.0, 1.0, size=(n_cloud, d_max))
        y_exact = exact.forward(pts)
        agg_t = agg_dt = 0.0
        for k in range(1, d_max + 1):
            xk = pts[:, :k]
            t_ap = approx.component(k, xk)
            # diagonal derivative from the already-computed forward image
            d_ex = (conditional(rho, k, xk)
                    / conditional(pi, k, y_exact[:, :k]))
            d_ap = approx.diag_deriv(k, xk)
            agg_t += float(np.max(np.abs(y_exact[:, k - 1] - t_ap)))
            agg_dt += float(np.max(np.abs(d_ex - d_ap)))
        wall = ((clock() - t0) * 1000.0) if clock else 0.0
        records.append(
            SweepRecord(
                epsilon=float(eps),
                n_eps=approx.n_eps,
                per_k_cards=cards,
                k_eff=k_eff,
                sup_err_T=agg_t,
                sup_err_dT=agg_dt,
                distances=None,
                wall_ms=wall,
            )
        )
    fit = fit_rate([r.n_eps for r in records],
                   [r.sup_err_T for r in records], "algebraic")
    return records, fit


@dataclass(frozen=True)
class PosteriorReport:
    epsilon: float
    n_eps: int
    xi: tuple
    distances: DistanceReport
    sample_mean: tuple
    sample_std: tuple
    quadrature_mean: tuple
    n_samples: int
    seed: int
    samples: np.ndarray = field(repr=False)

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "N_eps": self.n_eps,
            "xi": list(self.xi),
            "distances": self.distances.to_json(),
            "sample_mean": list(self.sample_mean),
            "sample_std": list(self.sample_std),
            "quadrature_mean": list(self.quadrature_mean),
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


def posterior_demo(
    A,
    varsigma,
    sigma: float,
    epsilon: float,
    n_samples: int = 2000,
    seed: int = 0,
    alpha: float = 1.0,
    distance_grid_order: int | None = None,
) -> PosteriorReport:
    """Fit the transport from uniform to a linear-Gaussian posterior and sample.

    Weights follow the practical recipe xi_j = 1 + alpha / b_j with b_j the
    forward-map column norms. Emits pushforward samples y_i = Tt(x_i) and
    compares the sample mean to the tensor-quadrature posterior mean.
    """
    pi = gaussian_posterior(A, varsigma, sigma)
    d = pi.d
    if d > 4:
        raise ValueError("posterior demo limited to d <= 4")
    if pi.anisotropy is None:
        raise ValueError("forward map has a zero column; anisotropy undefined")
    rho = uniform(d)
    xi = xi_from_anisotropy(pi.anisotropy, alpha)
    approx = build_approx_transport(rho, pi, xi, epsilon)
    grid = uniform_grid(distance_grid_order or _distance_grid_order(d), d)
    dist = pullback_distance(InverseTriangularMap(approx), rho, pi, grid)
    rng = rng_from_seed(seed)
    x = rng.uniform(-1.0, 1.0, size=(n_samples, d))
    y = approx.forward(x)
    quad_mean = tuple(
        integrate(lambda p, j=j: p[:, j] * pi.evaluate(p), grid) for j in range(d)
    )
    return PosteriorReport(
        epsilon=float(epsilon),
        n_eps=approx.n_eps,
        xi=tuple(xi.xi),
        distances=dist,
        sample_mean=tuple(float(v) for v in y.mean(axis=0)),
        sample_std=tuple(float(v) for v in y.std(axis=0, ddof=1)),
        quadrature_mean=quad_mean,
        n_samples=n_samples,
        seed=seed,
        samples=y,
    )


def records_to_csv(records) -> str:
    lines = [CSV_HEADER]
    lines.extend(r.csv_row() for r in records)
    return "\n".join(lines) + "\n"
