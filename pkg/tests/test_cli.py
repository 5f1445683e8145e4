import json
from pathlib import Path
import subprocess
import sys

import pytest
import yaml

from chemostokes.cli import main

FIXTURE = Path(__file__).parents[1] / "docs" / "fixtures" / "fixture_2d.yaml"

MINIMAL = {
    "grid": {"dim": 2, "cells": [16, 16], "lengths": [1.0, 1.0]},
    "params": {"kappa": 1.0, "dt": 0.01, "t_end": 0.1, "phi_gradient": [0.0, -5.0], "snapshot_every": 5},
    "initial": {"generator": "constant-plus-bump"},
    "output": {"run_id": "mini"},
}


def _write(tmp_path, doc, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return path


def _stderr_json(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_run_minimal(tmp_path):
    cfg = _write(tmp_path, MINIMAL)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "out"), "--quiet"]) == 0
    run = tmp_path / "out" / "run" / "mini"
    assert len((run / "diag.csv").read_text().splitlines()) == 1 + 10
    meta = json.loads((run / "meta.json").read_text())
    assert meta["n_steps"] == 10 and meta["provenance"]["config_sha256"]
    assert (run / "snap_10.bin").exists() and (run / "snap_10.json").exists()
    fit = json.loads((run / "fit.json").read_text())
    assert set(fit["fits"]) == {"sup_c", "l2_n_dev", "l2_u"}


def test_kappa_out_of_range_exit_2(tmp_path, capsys):
    cfg = _write(tmp_path, {**MINIMAL, "params": {**MINIMAL["params"], "kappa": 2}})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    err = _stderr_json(capsys)
    assert err["kind"] == "config" and "|kappa| must be <= 1" in err["errors"][0]
    assert not (tmp_path / "run").exists()


def test_missing_config_and_bad_workers(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.yaml")]) == 2
    cfg = _write(tmp_path, MINIMAL)
    assert main(["sweep", "--config", str(cfg), "--workers", "0"]) == 2


def test_runtime_failure_exit_3(tmp_path, capsys):
    doc = {**MINIMAL, "tolerance": {"preconditioner": "none", "max_iter": 1}}
    assert main(["run", "--config", str(_write(tmp_path, doc)), "--out", str(tmp_path), "--quiet"]) == 3
    assert _stderr_json(capsys)["kind"] == "runtime"


def test_sweep_commands(tmp_path, capsys):
    cfg = _write(tmp_path, MINIMAL)
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "sweep" in _stderr_json(capsys)["errors"][0]
    doc = {**MINIMAL, "sweep": {"parameter": "kappa", "values": [0.0], "norms": [["u", 2.0]]}}
    assert main(["sweep", "--config", str(_write(tmp_path, doc)), "--out", str(tmp_path / "s0"), "--quiet"]) == 0
    assert len((tmp_path / "s0" / "sweep.csv").read_text().splitlines()) == 2
    doc["sweep"] = {"parameter": "kappa", "values": [1.0, 0.5, 0.25, 0.125, 0.0], "norms": [["u", 2.0], ["n", 1.5]]}
    out = tmp_path / "s1"
    assert main(["sweep", "--config", str(_write(tmp_path, doc)), "--out", str(out), "--workers", "2", "--quiet"]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()[1:]
    assert len(rows) == 5 * 2
    doc_json = json.loads((out / "sweep.json").read_text())
    assert doc_json["config_sha256"] and doc_json["horizon"] == pytest.approx(0.1)


def test_validate_prints_canonical_form(tmp_path, capsys):
    assert main(["validate", "--config", str(FIXTURE)]) == 0
    printed = yaml.safe_load(capsys.readouterr().out)
    assert printed["params"]["kappa"] == 1.0 and printed["grid"]["cells"] == [32, 32]


def test_fixture_run_is_byte_identical(tmp_path):
    doc = yaml.safe_load(FIXTURE.read_text())
    doc["params"]["t_end"] = 1.0  # shortened horizon keeps the unit suite fast
    cfg = _write(tmp_path, doc)
    outs = []
    for k in range(2):
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / f"o{k}"), "--quiet"]) == 0
        outs.append((tmp_path / f"o{k}" / "run" / "fixture_2d" / "diag.csv").read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point(tmp_path):
    cfg = _write(tmp_path, MINIMAL)
    proc = subprocess.run([sys.executable, "-m", "chemostokes", "validate", "--config", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "grid:" in proc.stdout
