"""Command-line runner: configs, exit codes, file outputs, determinism."""

import json
import os

import numpy as np
import pytest

from vortexsurf.cli import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_TOLERANCE,
    SCHEMA_VERSION,
    main,
)


def write_cfg(path, data):
    data.setdefault("schema_version", SCHEMA_VERSION)
    with open(path, "w") as f:
        json.dump(data, f)
    return str(path)


def read_summary(outdir):
    with open(os.path.join(outdir, "summary.json")) as f:
        return json.load(f)


def simulate_cfg(**extra):
    cfg = {
        "surface": {"kind": "torus", "tau": [0.0, 1.0]},
        "vortices": [[0.3, 0.4, 1.0], [0.7, 0.6, -1.0]],
        "a": [0.1],
        "b": [0.2],
        "integrator": {"dt": 5e-3, "T": 0.1, "stride": 5},
    }
    cfg.update(extra)
    return cfg


def test_simulate_outputs(tmp_path):
    cfg = write_cfg(tmp_path / "cfg.json", simulate_cfg())
    out = str(tmp_path / "out")
    assert main(["simulate", cfg, "--out", out]) == EXIT_OK
    with open(os.path.join(out, "trajectory.csv")) as f:
        header = f.readline().strip()
    assert header == "t,k,chart,x,y,a_1,b_1,H"
    summary = read_summary(out)
    assert summary["passed"] is True
    assert "hamiltonian_drift_rel" in summary
    assert summary["tolerances"]["hamiltonian_drift_rel"] == 1e-8
    for name in ("trajectory.png", "energy.png"):
        assert os.path.getsize(os.path.join(out, name)) > 0


def test_simulate_deterministic(tmp_path):
    cfg = write_cfg(tmp_path / "cfg.json", simulate_cfg())
    out1, out2 = str(tmp_path / "o1"), str(tmp_path / "o2")
    assert main(["simulate", cfg, "--out", out1]) == EXIT_OK
    assert main(["simulate", cfg, "--out", out2]) == EXIT_OK
    for name in ("trajectory.csv", "summary.json"):
        with open(os.path.join(out1, name), "rb") as f:
            b1 = f.read()
        with open(os.path.join(out2, name), "rb") as f:
            b2 = f.read()
        assert b1 == b2


def test_simulate_tolerance_failure(tmp_path):
    cfg = write_cfg(
        tmp_path / "cfg.json",
        simulate_cfg(tolerances={"hamiltonian_drift_rel": 1e-30}),
    )
    out = str(tmp_path / "out")
    assert main(["simulate", cfg, "--out", out]) == EXIT_TOLERANCE
    summary = read_summary(out)
    assert summary["passed"] is False
    assert summary["tolerances"]["hamiltonian_drift_rel"] == 1e-30


def test_simulate_collision_is_numerical_halt(tmp_path):
    cfg = write_cfg(
        tmp_path / "cfg.json",
        simulate_cfg(vortices=[[0.3, 0.4, 1.0], [0.3, 0.4, 1.0]], a=[0.0], b=[0.0]),
    )
    assert main(["simulate", cfg, "--out", str(tmp_path / "out")]) == EXIT_NUMERICAL


def test_config_errors(tmp_path):
    out = str(tmp_path / "out")
    bad_version = write_cfg(tmp_path / "v.json", {**simulate_cfg(), "schema_version": 99})
    assert main(["simulate", bad_version, "--out", out]) == EXIT_CONFIG
    bad_genus = write_cfg(tmp_path / "g.json", simulate_cfg(a=[0.1, 0.2]))
    assert main(["simulate", bad_genus, "--out", out]) == EXIT_CONFIG
    bad_surface = write_cfg(tmp_path / "s.json", simulate_cfg(surface={"kind": "klein"}))
    assert main(["simulate", bad_surface, "--out", out]) == EXIT_CONFIG
    bad_tau = write_cfg(
        tmp_path / "t.json", simulate_cfg(surface={"kind": "torus", "tau": [0.0, -1.0]})
    )
    assert main(["simulate", bad_tau, "--out", out]) == EXIT_CONFIG
    missing = str(tmp_path / "nope.json")
    assert main(["simulate", missing, "--out", out]) == EXIT_CONFIG
    notjson = tmp_path / "n.json"
    notjson.write_text("{broken")
    assert main(["simulate", str(notjson), "--out", out]) == EXIT_CONFIG


def test_dt_override(tmp_path):
    cfg = write_cfg(tmp_path / "cfg.json", simulate_cfg())
    out1, out2 = str(tmp_path / "o1"), str(tmp_path / "o2")
    assert main(["simulate", cfg, "--out", out1]) == EXIT_OK
    assert main(["simulate", cfg, "--out", out2, "--dt", "2e-3"]) == EXIT_OK
    with open(os.path.join(out1, "trajectory.csv")) as f:
        n1 = sum(1 for _ in f)
    with open(os.path.join(out2, "trajectory.csv")) as f:
        n2 = sum(1 for _ in f)
    assert n2 > n1


def test_kimura_run(tmp_path):
    cfg = write_cfg(
        tmp_path / "cfg.json",
        {
            "surface": {"kind": "sphere"},
            "experiment": {
                "center": [0.0, 0.0],
                "direction": [1.0, 0.0],
                "gamma1": 1.0,
                "epsilons": [0.2, 0.1],
                "window": 0.5,
            },
        },
    )
    out = str(tmp_path / "out")
    assert main(["kimura", cfg, "--out", out]) == EXIT_OK
    with open(os.path.join(out, "deviation.csv")) as f:
        header = f.readline().strip()
    assert header == "eps,deviation,speed_drift,angle_defect,hamiltonian_drift_rel"
    summary = read_summary(out)
    assert summary["monotone_decreasing"] is True
    assert summary["checks"]["deviation_ratio"]["passed"] is True
    assert os.path.getsize(os.path.join(out, "deviation.png")) > 0


def test_kimura_bad_epsilons_is_config_error(tmp_path):
    cfg = write_cfg(
        tmp_path / "cfg.json",
        {
            "surface": {"kind": "sphere"},
            "experiment": {"epsilons": [0.1, 0.2], "direction": [1.0, 0.0]},
        },
    )
    assert main(["kimura", cfg, "--out", str(tmp_path / "out")]) == EXIT_CONFIG


def test_geodesic_closure(tmp_path):
    cfg = write_cfg(
        tmp_path / "cfg.json",
        {
            "surface": {"kind": "sphere"},
            "experiment": {"start": [0.0, 0.0], "direction": [1.0, 0.0]},
            "integrator": {"dt": 1e-3, "T": 2 * np.pi},
            "tolerances": {"closure": 1e-6},
        },
    )
    out = str(tmp_path / "out")
    assert main(["geodesic", cfg, "--out", out]) == EXIT_OK
    summary = read_summary(out)
    assert summary["checks"]["closure"]["passed"] is True
    assert summary["checks"]["speed_drift_rel"]["passed"] is True
    with open(os.path.join(out, "path.csv")) as f:
        assert f.readline().strip() == "t,chart,x,y,metric_speed"
    assert os.path.getsize(os.path.join(out, "path.png")) > 0


def test_green_check_runs_and_seeds(tmp_path):
    cfg = write_cfg(
        tmp_path / "cfg.json",
        {"surface": {"kind": "torus", "tau": [0.3, 1.1]}, "seed": 7, "experiment": {"pairs": 8}},
    )
    out1, out2, out3 = (str(tmp_path / d) for d in ("o1", "o2", "o3"))
    assert main(["green-check", cfg, "--out", out1]) == EXIT_OK
    assert main(["green-check", cfg, "--out", out2]) == EXIT_OK
    with open(os.path.join(out1, "summary.json"), "rb") as f:
        b1 = f.read()
    with open(os.path.join(out2, "summary.json"), "rb") as f:
        b2 = f.read()
    assert b1 == b2
    assert main(["green-check", cfg, "--out", out3, "--seed", "11"]) == EXIT_OK
    assert read_summary(out3)["seed"] == 11
    summary = read_summary(out1)
    for name in ("symmetry", "gradient_vs_fd", "laplacian_identity", "mean_zero", "h11_identity"):
        assert summary["checks"][name]["passed"] is True
        assert name in summary["tolerances"]
    assert os.path.getsize(os.path.join(out1, "green.png")) > 0


def test_schottky_check(tmp_path):
    cfg = write_cfg(
        tmp_path / "cfg.json",
        {"experiment": {"samples": [64, 128, 256]}},
    )
    out = str(tmp_path / "out")
    assert main(["schottky-check", cfg, "--out", out]) == EXIT_OK
    summary = read_summary(out)
    assert summary["checks"]["boundary_residual"]["passed"] is True
    assert abs(summary["one_sided_residual"] - 1.0) < 1e-3
    raw = summary["residual_raw"]
    assert 3.5 < raw[0] / raw[1] < 4.5
    with open(os.path.join(out, "residuals.csv")) as f:
        assert f.readline().strip() == "n,residual_normalized,residual_raw"
    assert os.path.getsize(os.path.join(out, "residuals.png")) > 0


def test_unknown_command_rejected():
    with pytest.raises(SystemExit):
        main(["frobnicate", "cfg.json"])
