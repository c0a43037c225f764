"""CLI contract: subcommands, config validation, exit codes, determinism."""

import json
import subprocess
import sys

import pytest

from krtransport.cli import main

LINEAR2 = {"family": "linear", "c": [0.3, 0.2]}
UNIFORM2 = {"family": "uniform", "d": 2}


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def _run(args):
    return main([str(a) for a in args])


def test_convergence_study_and_rerun_bitwise(tmp_path):
    cfg = _write(tmp_path, "c.json", {
        "reference": UNIFORM2,
        "target": LINEAR2,
        "xi": {"alpha": 0.5},
        "epsilon_list": [0.1, 0.03, 0.01],
        "seed": 7,
        "n_cloud": 64,
        "distance_grid_order": 12,
    })
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert _run(["--config", cfg, "--out", out1, "study", "convergence"]) == 0
    assert _run(["--config", cfg, "--out", out2, "study", "convergence"]) == 0
    assert (out1 / "convergence.csv").read_bytes() == (
        out2 / "convergence.csv").read_bytes()
    assert (out1 / "convergence.json").read_bytes() == (
        out2 / "convergence.json").read_bytes()
    rows = (out1 / "convergence.csv").read_text().strip().split("\n")
    assert len(rows) == 4


def test_truncation_study(tmp_path):
    cfg = _write(tmp_path, "t.json", {
        "amplitude": 0.4,
        "s": 2.0,
        "d_max": 4,
        "epsilon_list": [0.3, 0.1, 0.03],
        "seed": 3,
        "n_cloud": 32,
    })
    assert _run(["--config", cfg, "--out", tmp_path, "study", "truncation"]) == 0
    data = json.loads((tmp_path / "truncation.json").read_text())
    assert data["fit"]["model"] == "algebraic"
    assert len(data["records"]) == 3


def test_posterior_study(tmp_path):
    cfg = _write(tmp_path, "p.json", {
        "A": [[1.0, 0.5]],
        "varsigma": [0.3],
        "sigma": 0.8,
        "epsilon": 0.01,
        "n_samples": 100,
        "seed": 5,
        "distance_grid_order": 12,
    })
    assert _run(["--config", cfg, "--out", tmp_path, "study", "posterior"]) == 0
    rep = json.loads((tmp_path / "posterior.json").read_text())
    assert rep["N_eps"] > 0
    samples = (tmp_path / "posterior_samples.csv").read_text().strip().split("\n")
    assert len(samples) == 101  # header + rows


def test_approx_build_then_eval_bitwise(tmp_path):
    bcfg = _write(tmp_path, "b.json", {
        "reference": UNIFORM2,
        "target": LINEAR2,
        "xi": {"alpha": 0.5},
        "epsilon": 0.01,
    })
    assert _run(["--config", bcfg, "--out", tmp_path, "approx", "build"]) == 0
    map_file = tmp_path / "approx_transport.json"
    pts = [[0.0, 0.0], [0.5, -0.25], [-0.9, 0.9]]
    ecfg_fresh = _write(tmp_path, "e1.json", {
        "reference": UNIFORM2, "target": LINEAR2, "mode": "approx",
        "xi": {"alpha": 0.5}, "epsilon": 0.01, "points": pts,
    })
    ecfg_loaded = _write(tmp_path, "e2.json", {
        "reference": UNIFORM2, "target": LINEAR2, "mode": "approx",
        "map_file": str(map_file), "points": pts,
    })
    o1, o2 = tmp_path / "f", tmp_path / "l"
    assert _run(["--config", ecfg_fresh, "--out", o1, "transport", "eval"]) == 0
    assert _run(["--config", ecfg_loaded, "--out", o2, "transport", "eval"]) == 0
    a = json.loads((o1 / "transport_eval.json").read_text())["mapped"]
    b = json.loads((o2 / "transport_eval.json").read_text())["mapped"]
    assert a == b  # serialized map reproduces the fresh fit bitwise


def test_transport_eval_exact_and_inverse(tmp_path):
    pts = [[0.2, -0.3]]
    fcfg = _write(tmp_path, "f.json", {
        "reference": UNIFORM2, "target": LINEAR2, "points": pts,
    })
    assert _run(["--config", fcfg, "--out", tmp_path, "transport", "eval"]) == 0
    y = json.loads((tmp_path / "transport_eval.json").read_text())["mapped"]
    icfg = _write(tmp_path, "i.json", {
        "reference": UNIFORM2, "target": LINEAR2, "points": y, "inverse": True,
    })
    assert _run(["--config", icfg, "--out", tmp_path, "transport", "eval"]) == 0
    back = json.loads((tmp_path / "transport_eval.json").read_text())["mapped"]
    assert abs(back[0][0] - 0.2) < 1e-8 and abs(back[0][1] + 0.3) < 1e-8


def test_distance_between_densities(tmp_path):
    cfg = _write(tmp_path, "d.json", {
        "f": LINEAR2, "g": UNIFORM2, "grid_order": 12,
    })
    assert _run(["--config", cfg, "--out", tmp_path, "distance"]) == 0
    rep = json.loads((tmp_path / "distance.json").read_text())
    assert rep["tv"] > 0 and rep["hellinger"] > 0


def test_sample_deterministic_and_seed_flag(tmp_path):
    cfg = _write(tmp_path, "s.json", {
        "target": LINEAR2, "xi": {"alpha": 0.5}, "epsilon": 0.01,
        "n_samples": 20, "seed": 11,
    })
    o1, o2, o3 = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert _run(["--config", cfg, "--out", o1, "sample"]) == 0
    assert _run(["--config", cfg, "--out", o2, "sample"]) == 0
    assert (o1 / "samples.csv").read_bytes() == (o2 / "samples.csv").read_bytes()
    assert _run(["--config", cfg, "--out", o3, "--seed", "99", "sample"]) == 0
    assert (o1 / "samples.csv").read_bytes() != (o3 / "samples.csv").read_bytes()


def test_unknown_key_rejected(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.json", {
        "target": LINEAR2, "epsilon": 0.1, "bogus": 1,
    })
    assert _run(["--config", cfg, "--out", tmp_path, "sample"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "config" and "bogus" in err["error"]


def test_missing_required_key(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.json", {"reference": UNIFORM2})
    assert _run(["--config", cfg, "--out", tmp_path, "approx", "build"]) == 2
    assert json.loads(capsys.readouterr().err)["kind"] == "config"


def test_bad_density_family(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.json", {
        "f": {"family": "nope"}, "g": UNIFORM2,
    })
    assert _run(["--config", cfg, "--out", tmp_path, "distance"]) == 2
    assert json.loads(capsys.readouterr().err)["kind"] == "config"


def test_numerical_error_exit_code(tmp_path, capsys):
    # sum |c| >= 1 violates positivity -> caught at density build (config),
    # so trigger a genuine numerical failure instead: epsilon outside (0,1)
    cfg = _write(tmp_path, "n.json", {
        "reference": UNIFORM2, "target": LINEAR2,
        "xi": {"alpha": 0.5}, "epsilon": 2.0,
    })
    rc = _run(["--config", cfg, "--out", tmp_path, "approx", "build"])
    assert rc == 3
    assert json.loads(capsys.readouterr().err)["kind"] == "numerical"


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    assert _run(["--config", p, "--out", tmp_path, "distance"]) == 2
    assert json.loads(capsys.readouterr().err)["kind"] == "config"


def test_points_file_csv(tmp_path):
    pf = tmp_path / "pts.csv"
    pf.write_text("0.1,0.2\n-0.3,0.4\n")
    cfg = _write(tmp_path, "c.json", {
        "reference": UNIFORM2, "target": LINEAR2, "points_file": str(pf),
    })
    assert _run(["--config", cfg, "--out", tmp_path, "transport", "eval"]) == 0
    out = json.loads((tmp_path / "transport_eval.json").read_text())
    assert len(out["mapped"]) == 2


def test_points_out_of_domain(tmp_path, capsys):
    cfg = _write(tmp_path, "c.json", {
        "reference": UNIFORM2, "target": LINEAR2, "points": [[2.0, 0.0]],
    })
    assert _run(["--config", cfg, "--out", tmp_path, "transport", "eval"]) == 2


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "krtransport.cli", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "transport" in proc.stdout and "study" in proc.stdout
