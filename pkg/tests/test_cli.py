import csv
import io
import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from forchheimer.cli import fresh_dir, main, validate_manifest
from forchheimer.config import load_config, parse_config
from forchheimer.errors import ConfigurationError

CONFIGS = Path(__file__).resolve().parent.parent / "demos" / "configs"


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_simulate_steady_and_manifest(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["--out", str(out), "simulate", str(CONFIGS / "steady.toml")]) == 0
    snaps = sorted((out / "snapshots").glob("*.csv"))
    body = [p.read_text().splitlines()[4:] for p in snaps]
    assert len(snaps) == 5 and all(b == body[0] for b in body)
    assert validate_manifest(out) == []
    man = json.loads((out / "manifest.json").read_text())
    assert "diagnostics.csv" in man["files"] and man["tool_version"]
    # tampering is detected
    (out / "diagnostics.csv").write_text("changed\n")
    assert validate_manifest(out) == ["hash mismatch diagnostics.csv"]


def test_output_dirs_never_reused(tmp_path):
    base = tmp_path / "x"
    assert [fresh_dir(base).name for _ in range(3)] == ["x", "x-001", "x-002"]


def test_simulate_failure_exit_codes(tmp_path, capsys):
    assert main(["--out", str(tmp_path / "f"), "simulate", str(CONFIGS / "stiff_failure.toml")]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("[law\n")
    assert main(["simulate", str(bad)]) == 1
    assert "error" in capsys.readouterr().err


def test_simulate_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["--out", str(d), "simulate", str(CONFIGS / "decay2d.toml")]) == 0
    for f in sorted(p.relative_to(a) for p in a.rglob("*.csv")):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_exponents_command(capsys):
    assert main(["exponents", str(CONFIGS / "exponents_n2.toml")]) == 0
    table = {r["name"]: r for r in rows(capsys.readouterr().out)}
    assert float(table["alpha_star"]["value"]) == pytest.approx(2 / 3, abs=1e-15)
    assert float(table["mu0"]["value"]) == 1.0
    assert table["alpha[alpha=2]"]["precondition_status"].startswith("violated")
    assert float(table["kappa_bar[alpha=4]"]["value"]) == pytest.approx(13 / 12)


def test_bounds_on_outflow_run(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["--out", str(out), "simulate", str(CONFIGS / "decay2d.toml")]) == 0
    capsys.readouterr()
    assert main(["bounds", str(out)]) == 0
    report = rows((out / "bounds_report.csv").read_text())
    verdicts = {(r["bound_id"], r["verdict"]) for r in report}
    assert ("Lalpha_local", "pass") in verdicts
    assert all(r["verdict"] in ("pass", "ratio-only") for r in report)
    assert validate_manifest(out) == []
    assert main(["bounds", str(out), "--checks", "nonsense"]) == 1


def test_bounds_precondition_rows(tmp_path, capsys):
    out = tmp_path / "run"
    main(["--out", str(out), "simulate", str(CONFIGS / "decay2d.toml")])
    assert main(["bounds", str(out), "--alpha", "1.5", "--checks", "lalpha"]) == 0
    report = rows((out / "bounds_report.csv").read_text())
    assert [r["verdict"] for r in report] == ["precondition-failed"]


def test_moser_check(tmp_path, capsys):
    out = tmp_path / "m.csv"
    assert main(["--seed", "7", "--out", str(out), "moser-check", "--count", "200"]) == 0
    table = rows(out.read_text())
    assert len(table) == 200 and all(r["pass"] == "true" for r in table)
    assert {r["case"] for r in table} >= {"above", "below", "crossing"}


def test_trace_check_small(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["--seed", "3", "--threads", "2", "--out", str(out), "trace-check", "--corpus-size", "8"]) == 0
    table = rows(out.read_text())
    assert {r["check"] for r in table} == {"trace_general", "trace_specialized", "parabolic_sobolev"}


def test_config_errors():
    base = {"law": {"terms": [[0.0, 1.0], [1.0, 1.0]]},
            "problem": {"lambda": 1.0, "t_end": 0.1},
            "grid": {"lengths": [1.0], "cells": [8]}}
    assert parse_config(base).setup.grid.cells == (8,)
    with pytest.raises(ConfigurationError):
        parse_config({k: v for k, v in base.items() if k != "grid"})
    with pytest.raises(ConfigurationError):
        parse_config({**base, "solver": {"bogus": 1}})
    with pytest.raises(ConfigurationError):
        parse_config({**base, "problem": {**base["problem"], "phi": {"preset": "wobbly"}}})
    with pytest.raises(ConfigurationError):
        parse_config({**base, "problem": {**base["problem"], "initial": {"kind": "nope"}}})


def test_config_presets_load():
    for p in CONFIGS.glob("*.toml"):
        assert load_config(p).setup.t_end > 0
