"""Command-line front end: reports, CSVs, exit codes, error JSON."""
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from fiber_atlas.cli import main
from fiber_atlas.config import RunConfig, parse_config_file, parse_overrides


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


# ----------------------------------------------------------------------
# config machinery
# ----------------------------------------------------------------------


def test_config_file_parsing(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nseed = 9\nradius = 4.5\nname = hello world\n")
    values = parse_config_file(path)
    assert values == {"seed": "9", "radius": "4.5", "name": "hello world"}
    cfg = RunConfig.build(None, str(path))
    assert cfg.seed == 9


def test_config_requires_seed(tmp_path):
    with pytest.raises(ValueError):
        RunConfig.build(None, None)


def test_overrides_beat_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("seed = 9\nradius = 4.5\n")
    cfg = RunConfig.build(None, str(path), parse_overrides(["radius=2.0"]))
    assert cfg.values["radius"] == "2.0"
    assert cfg.get_positive_float("radius", 1.0) == 2.0
    with pytest.raises(ValueError):
        parse_overrides(["radius:2.0"])


def test_config_validation_helpers(tmp_path):
    cfg = RunConfig.build(3, None, {"count": "-5"})
    with pytest.raises(ValueError):
        cfg.get_positive_int("count", 10)


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------


def test_betti_subcommand(tmp_path, capsys):
    t = np.linspace(0, 2 * np.pi, 180, endpoint=False)
    pts = np.c_[np.cos(t), np.sin(t)]
    csv = tmp_path / "circle.csv"
    np.savetxt(csv, pts, delimiter=",")
    out_dir = tmp_path / "out"
    code, out, err = run_cli(
        ["betti", "--seed", "0", "--in", str(csv), "--eps", "auto",
         "--emit-persistence", "--out", str(out_dir)],
        capsys,
    )
    assert code == 0
    assert "b0=1 b1=1" in out
    report = json.loads((out_dir / "betti.json").read_text())
    assert report["betti"]["b0"] == 1 and report["betti"]["b1"] == 1
    assert (out_dir / "persistence.csv").exists()
    assert (out_dir / "betti.timing.json").exists()


def test_fiber_sample_subcommand(tmp_path, capsys):
    out_dir = tmp_path / "out"
    code, out, err = run_cli(
        ["fiber-sample", "--seed", "5", "--map", "x^2+y^2-1", "--vars", "x,y",
         "--target", "0", "--radius", "2", "--count", "300", "--out", str(out_dir)],
        capsys,
    )
    assert code == 0
    rows = (out_dir / "fiber_sample.csv").read_text().strip().splitlines()
    assert rows[0] == "x,y,residual"
    assert len(rows) == 301
    report = json.loads((out_dir / "fiber_sample.json").read_text())
    assert report["sample"]["count"] == 300
    assert report["config"]["seed"] == 5


def test_critical_points_subcommand(tmp_path, capsys):
    out_dir = tmp_path / "out"
    code, out, err = run_cli(
        ["critical-points", "--seed", "1", "--objective", "x", "--vars", "x,y",
         "--constraints", "x^2+y^2-1", "--box=-2,2", "--multistart", "150",
         "--out", str(out_dir)],
        capsys,
    )
    assert code == 0
    report = json.loads((out_dir / "critical_points.json").read_text())
    assert len(report["points"]) == 2
    indices = sorted(p["morse_index"] for p in report["points"])
    assert indices == [0, 1]


def test_scan_arc_subcommand_flags_jump(tmp_path, capsys):
    out_dir = tmp_path / "out"
    code, out, err = run_cli(
        ["scan-arc", "--seed", "11", "--map", "x*(x*y-1)", "--vars", "x,y",
         "--arc", "0:1", "--steps", "11", "--radius", "4", "--count", "1500",
         "--out", str(out_dir)],
        capsys,
    )
    assert code == 0
    assert "verdict=ATYPICAL" in out
    report = json.loads((out_dir / "scan_arc.json").read_text())
    codes = [r["code"] for r in report["verdict"]["reasons"]]
    assert "b0-jump" in codes


def test_error_json_on_stderr(tmp_path, capsys):
    code, out, err = run_cli(
        ["betti", "--seed", "0", "--in", str(tmp_path / "missing.csv")], capsys
    )
    assert code == 1
    payload = json.loads(err.strip().splitlines()[-1])
    assert "error" in payload and "message" in payload


def test_seed_is_mandatory(tmp_path, capsys):
    t = np.linspace(0, 2 * np.pi, 30, endpoint=False)
    csv = tmp_path / "c.csv"
    np.savetxt(csv, np.c_[np.cos(t), np.sin(t)], delimiter=",")
    code, out, err = run_cli(["betti", "--in", str(csv)], capsys)
    assert code == 1
    assert "seed" in json.loads(err.strip()).get("message", "")


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "fiber_atlas.cli", "--version"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "fiber-atlas" in proc.stdout
