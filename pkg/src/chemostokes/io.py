"""On-disk layout of snapshots and trajectories.

A snapshot is a flat little-endian float64 file ``snap_<k>.bin`` holding
``n``, ``c``, every velocity component and the pressure back to back, plus a
JSON sidecar ``snap_<k>.json`` with the time stamp, grid and byte layout.
A trajectory directory holds ``meta.json``, the snapshots and ``diag.csv``.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .diagnostics import CSV_COLUMNS, DiagnosticsRecord
from .fields import ScalarField, VectorField
from .grid import Grid
from .stepper import Params, State, Trajectory

DTYPE = "<f8"


def _blocks(state: State):
    yield "n", state.n.values
    yield "c", state.c.values
    for a, ua in enumerate(state.u.components):
        yield f"u{a}", ua
    yield "pressure", state.pressure.values


def write_snapshot(state: State, path) -> Path:
    path = Path(path)
    layout, offset = [], 0
    with open(path, "wb") as fh:
        for name, arr in _blocks(state):
            data = np.ascontiguousarray(arr, dtype=DTYPE)
            fh.write(data.tobytes())
            layout.append({"name": name, "shape": list(arr.shape), "offset": offset})
            offset += data.nbytes
    sidecar = {"t": state.t, "grid": state.grid.to_dict(), "dtype": DTYPE, "layout": layout}
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=1))
    return path


def read_snapshot(path) -> State:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    grid = Grid.from_dict(meta["grid"])
    raw = path.read_bytes()
    arrays = {}
    for block in meta["layout"]:
        count = int(np.prod(block["shape"]))
        arrays[block["name"]] = np.frombuffer(raw, dtype=meta["dtype"], count=count,
                                              offset=block["offset"]).reshape(block["shape"]).copy()
    u = VectorField(grid, tuple(arrays[f"u{a}"] for a in range(grid.dim)))
    return State(ScalarField(grid, arrays["n"]), ScalarField(grid, arrays["c"]), u,
                 ScalarField(grid, arrays["pressure"]), float(meta["t"]))


def write_diagnostics(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([repr(float(x)) for x in r.row()])


def read_diagnostics(path) -> list:
    with open(path, newline="") as fh:
        return [DiagnosticsRecord.from_row(row) for row in csv.DictReader(fh)]


def save_trajectory(traj: Trajectory, path, snapshots: bool = True) -> Path:
    """Write ``meta.json``, ``diag.csv`` (one row per step) and the snapshots."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    dt = traj.params.dt
    steps = [int(round(s.t / dt)) for s in traj.snapshots]
    meta = {
        "grid": traj.grid.to_dict(),
        "params": traj.params.to_dict(),
        "n_steps": traj.n_steps,
        "snapshot_steps": steps if snapshots else [],
        "initial_diagnostics": dict(zip(CSV_COLUMNS, traj.records[0].row())),
        "provenance": traj.provenance,
    }
    (path / "meta.json").write_text(json.dumps(meta, indent=1, sort_keys=True))
    write_diagnostics(traj.records[1:], path / "diag.csv")
    if snapshots:
        for k, s in zip(steps, traj.snapshots):
            write_snapshot(s, path / f"snap_{k}.bin")
    return path


def load_trajectory(path) -> Trajectory:
    path = Path(path)
    meta = json.loads((path / "meta.json").read_text())
    grid = Grid.from_dict(meta["grid"])
    params = Params.from_dict(meta["params"])
    snaps = [read_snapshot(path / f"snap_{k}.bin") for k in meta["snapshot_steps"]]
    first = DiagnosticsRecord.from_row(meta["initial_diagnostics"])
    records = [first] + read_diagnostics(path / "diag.csv")
    return Trajectory(grid, params, snaps, records, meta["n_steps"], meta.get("provenance", {}))
