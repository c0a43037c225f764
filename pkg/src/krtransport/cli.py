"""Command-line interface: JSON configs in, CSV/JSON artifacts out.

Subcommands:
    transport eval   map points through the exact or a serialized map
    approx build     fit an approximate transport and serialize it
    distance         distances between two densities or map pullback vs target
    sample           emit pushforward samples
    study convergence | truncation | posterior

Exit codes: 0 success, 2 config error, 3 numerical failure. Errors are
emitted as a JSON object on stderr.
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .approx import ApproxTransport, InverseTriangularMap, build_approx_transport
from .density import Density, density_from_config
from .indexsets import WeightVector, xi_from_anisotropy
from .metrics import distance_report, pullback_distance
from .quadrature import uniform_grid
from .studies import (
    convergence_study,
    posterior_demo,
    records_to_csv,
    rng_from_seed,
    truncation_study,
)
from .transport import ExactTransport


class ConfigError(ValueError):
    pass


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(p) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


class _Config:
    """Strict key accessor: every key must be consumed or the config fails."""

    def __init__(self, raw: dict):
        self.raw = dict(raw)

    _MISSING = object()

    def take(self, key, default=_MISSING):
        if key in self.raw:
            return self.raw.pop(key)
        if default is self._MISSING:
            raise ConfigError(f"missing required config key {key!r}")
        return default

    def finish(self):
        if self.raw:
            raise ConfigError(f"unknown config keys: {sorted(self.raw)}")


def _density(spec, what: str) -> Density:
    if not isinstance(spec, dict):
        raise ConfigError(f"{what} density spec must be an object")
    try:
        return density_from_config(spec)
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"bad {what} density spec: {e}") from e


def _weights(spec, target: Density) -> WeightVector:
    if isinstance(spec, list):
        return WeightVector(tuple(float(x) for x in spec))
    if isinstance(spec, dict):
        sub = _Config(spec)
        alpha = float(sub.take("alpha", 1.0))
        b = sub.take("anisotropy", None)
        sub.finish()
        if b is None:
            if target.anisotropy is None:
                raise ConfigError(
                    "xi.anisotropy omitted and target density has none"
                )
            b = target.anisotropy
        return xi_from_anisotropy(b, alpha)
    raise ConfigError("xi must be a list of weights or an object")


def _read_points(cfg: _Config, d: int) -> np.ndarray:
    pts = cfg.take("points", None)
    path = cfg.take("points_file", None)
    if (pts is None) == (path is None):
        raise ConfigError("exactly one of 'points' / 'points_file' required")
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"points file not found: {path}")
        if p.suffix == ".json":
            with open(p) as fh:
                pts = json.load(fh)
        else:
            pts = np.loadtxt(p, delimiter=",", ndmin=2)
    arr = np.asarray(pts, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != d:
        raise ConfigError(f"points must be an (m, {d}) array")
    if np.any(np.abs(arr) > 1.0):
        raise ConfigError("points must lie in [-1, 1]^d")
    return arr


def _write_json(out_dir: Path, name: str, obj) -> Path:
    path = out_dir / name
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
    return path


def _samples_csv(y: np.ndarray) -> str:
    lines = [",".join(f"y{j+1}" for j in range(y.shape[1]))]
    lines.extend(",".join(repr(float(v)) for v in row) for row in y)
    return "\n".join(lines) + "\n"


def _cmd_transport_eval(cfg: _Config, out_dir: Path, seed):
    reference = _density(cfg.take("reference"), "reference")
    target = _density(cfg.take("target"), "target")
    mode = cfg.take("mode", "exact")
    inverse = bool(cfg.take("inverse", False))
    pts = _read_points(cfg, reference.d)
    if mode == "exact":
        tmap = ExactTransport(reference=reference, target=target)
    elif mode == "approx":
        map_file = cfg.take("map_file", None)
        if map_file is not None:
            with open(map_file) as fh:
                tmap = ApproxTransport.from_json(json.load(fh))
        else:
            xi = _weights(cfg.take("xi", {}), target)
            eps = float(cfg.take("epsilon"))
            tmap = build_approx_transport(reference, target, xi, eps)
    else:
        raise ConfigError(f"mode must be 'exact' or 'approx', got {mode!r}")
    cfg.finish()
    mapped = tmap.inverse(pts) if inverse else tmap.forward(pts)
    out = {
        "mode": mode,
        "inverse": inverse,
        "points": pts.tolist(),
        "mapped": np.asarray(mapped).tolist(),
    }
    path = _write_json(out_dir, "transport_eval.json", out)
    print(f"wrote {path}")
    return 0


def _cmd_approx_build(cfg: _Config, out_dir: Path, seed):
    reference = _density(cfg.take("reference"), "reference")
    target = _density(cfg.take("target"), "target")
    xi = _weights(cfg.take("xi", {}), target)
    eps = float(cfg.take("epsilon"))
    cfg.finish()
    tmap = build_approx_transport(reference, target, xi, eps)
    path = _write_json(out_dir, "approx_transport.json", tmap.to_json())
    print(f"wrote {path} (N_eps={tmap.n_eps})")
    return 0


def _cmd_distance(cfg: _Config, out_dir: Path, seed):
    grid_order = cfg.take("grid_order", None)
    map_file = cfg.take("map_file", None)
    if map_file is not None:
        reference = _density(cfg.take("reference"), "reference")
        target = _density(cfg.take("target"), "target")
        with open(map_file) as fh:
            tmap = ApproxTransport.from_json(json.load(fh))
        d = target.d
        grid = uniform_grid(int(grid_order or (30 if d <= 3 else 15)), d)
        report = pullback_distance(
            InverseTriangularMap(tmap), reference, target, grid
        )
    else:
        f = _density(cfg.take("f"), "f")
        g = _density(cfg.take("g"), "g")
        if f.d != g.d:
            raise ConfigError("densities have different dimensions")
        grid = uniform_grid(int(grid_order or (30 if f.d <= 3 else 15)), f.d)
        report = distance_report(f, g, f.d, grid, oversample_tv=True)
    cfg.finish()
    path = _write_json(out_dir, "distance.json", report.to_json())
    print(f"wrote {path}")
    return 0


def _cmd_sample(cfg: _Config, out_dir: Path, seed):
    ref_spec = cfg.take("reference", None)
    target = _density(cfg.take("target"), "target")
    if ref_spec is None:
        from .density import uniform as uniform_density

        reference = uniform_density(target.d)
    else:
        reference = _density(ref_spec, "reference")
    xi = _weights(cfg.take("xi", {}), target)
    eps = float(cfg.take("epsilon"))
    n = int(cfg.take("n_samples", 1000))
    cfg_seed = int(cfg.take("seed", 0))
    seed = cfg_seed if seed is None else seed
    cfg.finish()
    tmap = build_approx_transport(reference, target, xi, eps)
    rng = rng_from_seed(seed)
    x = rng.uniform(-1.0, 1.0, size=(n, target.d))
    y = tmap.forward(x)
    path = out_dir / "samples.csv"
    path.write_text(_samples_csv(y))
    _write_json(out_dir, "samples_meta.json",
                {"epsilon": eps, "N_eps": tmap.n_eps, "seed": seed, "n": n})
    print(f"wrote {path}")
    return 0


def _cmd_study_convergence(cfg: _Config, out_dir: Path, seed):
    reference = _density(cfg.take("reference"), "reference")
    target = _density(cfg.take("target"), "target")
    xi = _weights(cfg.take("xi", {}), target)
    eps_list = [float(e) for e in cfg.take("epsilon_list")]
    cfg_seed = int(cfg.take("seed", 0))
    seed = cfg_seed if seed is None else seed
    n_cloud = int(cfg.take("n_cloud", 2048))
    grid_order = cfg.take("distance_grid_order", None)
    timing = bool(cfg.take("timing", False))
    cfg.finish()
    records, fit = convergence_study(
        reference, target, xi, eps_list, seed=seed, n_cloud=n_cloud,
        distance_grid_order=int(grid_order) if grid_order else None,
        clock=time.perf_counter if timing else None,
    )
    (out_dir / "convergence.csv").write_text(records_to_csv(records))
    _write_json(out_dir, "convergence.json",
                {"records": [r.to_json() for r in records],
                 "fit": fit.to_json()})
    print(f"wrote {out_dir / 'convergence.csv'}")
    return 0


def _cmd_study_truncation(cfg: _Config, out_dir: Path, seed):
    amplitude = float(cfg.take("amplitude"))
    s = float(cfg.take("s"))
    d_max = int(cfg.take("d_max"))
    eps_list = [float(e) for e in cfg.take("epsilon_list")]
    alpha = float(cfg.take("alpha", 1.0))
    cfg_seed = int(cfg.take("seed", 0))
    seed = cfg_seed if seed is None else seed
    n_cloud = int(cfg.take("n_cloud", 512))
    timing = bool(cfg.take("timing", False))
    cfg.finish()
    records, fit = truncation_study(
        amplitude, s, d_max, eps_list, alpha=alpha, seed=seed,
        n_cloud=n_cloud, clock=time.perf_counter if timing else None,
    )
    (out_dir / "truncation.csv").write_text(records_to_csv(records))
    _write_json(out_dir, "truncation.json",
                {"records": [r.to_json() for r in records],
                 "fit": fit.to_json()})
    print(f"wrote {out_dir / 'truncation.csv'}")
    return 0


def _cmd_study_posterior(cfg: _Config, out_dir: Path, seed):
    A = cfg.take("A")
    varsigma = cfg.take("varsigma")
    sigma = float(cfg.take("sigma"))
    eps = float(cfg.take("epsilon"))
    n_samples = int(cfg.take("n_samples", 2000))
    cfg_seed = int(cfg.take("seed", 0))
    seed = cfg_seed if seed is None else seed
    alpha = float(cfg.take("alpha", 1.0))
    grid_order = cfg.take("distance_grid_order", None)
    cfg.finish()
    report = posterior_demo(
        A, varsigma, sigma, eps, n_samples=n_samples, seed=seed, alpha=alpha,
        distance_grid_order=int(grid_order) if grid_order else None,
    )
    _write_json(out_dir, "posterior.json", report.to_json())
    (out_dir / "posterior_samples.csv").write_text(_samples_csv(report.samples))
    print(f"wrote {out_dir / 'posterior.json'}")
    return 0


_STUDIES = {
    "convergence": _cmd_study_convergence,
    "truncation": _cmd_study_truncation,
    "posterior": _cmd_study_posterior,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="krtransport",
        description="Triangular transport maps with sparse rational approximation",
    )
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--threads", type=int, default=None,
                        help="numba thread count (env KRT_THREADS overrides)")
    sub = parser.add_subparsers(dest="command", required=True)
    t = sub.add_parser("transport")
    t.add_argument("action", choices=["eval"])
    a = sub.add_parser("approx")
    a.add_argument("action", choices=["build"])
    sub.add_parser("distance")
    sub.add_parser("sample")
    st = sub.add_parser("study")
    st.add_argument("action", choices=sorted(_STUDIES))
    return parser


def _set_threads(n):
    env = os.environ.get("KRT_THREADS")
    if env:
        n = int(env)
    if n is None:
        return
    try:
        import numba

        numba.set_num_threads(max(1, n))
    except ImportError:
        pass


def main(argv=None) -> int:
    # parse_args exits with code 2 on bad flags, matching the config exit code
    args = build_parser().parse_args(argv)
    try:
        _set_threads(args.threads)
        cfg = _Config(_load_config(args.config))
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "transport":
            return _cmd_transport_eval(cfg, out_dir, args.seed)
        if args.command == "approx":
            return _cmd_approx_build(cfg, out_dir, args.seed)
        if args.command == "distance":
            return _cmd_distance(cfg, out_dir, args.seed)
        if args.command == "sample":
            return _cmd_sample(cfg, out_dir, args.seed)
        if args.command == "study":
            return _STUDIES[args.action](cfg, out_dir, args.seed)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as e:
        json.dump({"kind": "config", "error": str(e)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
        json.dump({"kind": "numerical", "error": str(e)}, sys.stderr)
        sys.stderr.write("\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
