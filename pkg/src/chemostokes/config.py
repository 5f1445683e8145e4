"""YAML run configuration.

Every block is validated before anything is allocated; problems are reported
as ``<block>.<field>: message`` strings collected into one :class:`ConfigError`.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
import hashlib
import json

import yaml

from .grid import make_grid
from .initial import InitialDataSpec
from .limits import COMPONENTS, KAPPA_EXPONENT_LIMITS
from .poisson import EllipticSolveSpec
from .stepper import Params


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class GridBlock:
    dim: int = 2
    cells: tuple = (32, 32)
    lengths: tuple = (2.0, 2.0)


@dataclass(frozen=True)
class ParamsBlock:
    kappa: float = 1.0
    eps: float = 0.0
    dt: float = 5e-3
    t_end: float = 1.0
    cfl_safety: float = 0.9
    snapshot_every: int = 1
    K0: float = 1.0
    phi_gradient: tuple = (0.0, -10.0)


@dataclass(frozen=True)
class ToleranceBlock:
    tol: float = 1e-10
    max_iter: int = 500
    preconditioner: str = "spectral"


@dataclass(frozen=True)
class SweepBlock:
    parameter: str = "kappa"
    values: tuple = (1.0, 0.5, 0.25, 0.125, 0.0)
    norms: tuple = (("u", 2.0),)


@dataclass(frozen=True)
class OutputBlock:
    dir: str = "out"
    run_id: str = "run0"
    save_members: bool = False


@dataclass(frozen=True)
class Config:
    grid: GridBlock = GridBlock()
    params: ParamsBlock = ParamsBlock()
    initial: InitialDataSpec = InitialDataSpec()
    tolerance: ToleranceBlock = ToleranceBlock()
    output: OutputBlock = OutputBlock()
    sweep: SweepBlock | None = None

    def to_dict(self) -> dict:
        d = _plain(asdict(self))
        if d["sweep"] is None:
            del d["sweep"]
        return d

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()

    def make_grid(self):
        return make_grid(self.grid.dim, self.grid.cells, self.grid.lengths)

    def elliptic_spec(self) -> EllipticSolveSpec:
        t = self.tolerance
        return EllipticSolveSpec(tol=t.tol, max_iter=t.max_iter, preconditioner=t.preconditioner)

    def make_params(self) -> Params:
        p = self.params
        return Params(kappa=p.kappa, eps=p.eps, phi_gradient=p.phi_gradient, dt=p.dt, t_end=p.t_end,
                      snapshot_every=p.snapshot_every, elliptic_spec=self.elliptic_spec(),
                      cfl_safety=p.cfl_safety, K0=p.K0)


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def _tuplify(x):
    if isinstance(x, list):
        return tuple(_tuplify(v) for v in x)
    return x


def _block(cls, raw, path, errors):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        errors.append(f"{path}: expected a mapping")
        return None
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            errors.append(f"{path}.{key}: unknown field")
            continue
        default = known[key].default
        value = _tuplify(value)
        try:
            if isinstance(default, bool):
                if not isinstance(value, bool):
                    raise TypeError
            elif isinstance(default, int) and not isinstance(default, bool):
                if isinstance(value, bool) or int(value) != value:
                    raise TypeError
                value = int(value)
            elif isinstance(default, float):
                if isinstance(value, bool):
                    raise TypeError
                value = float(value)
            elif isinstance(default, str):
                if not isinstance(value, str):
                    raise TypeError
            elif isinstance(default, tuple):
                if not isinstance(value, tuple):
                    raise TypeError
        except (TypeError, ValueError):
            errors.append(f"{path}.{key}: expected {type(default).__name__}, got {value!r}")
            continue
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        errors.append(f"{path}: {exc}")
        return None


def _check_grid(g, errors):
    if g.dim not in (2, 3):
        errors.append(f"grid.dim: must be 2 or 3, got {g.dim}")
        return
    if len(g.cells) != g.dim:
        errors.append(f"grid.cells: expected {g.dim} entries, got {len(g.cells)}")
    elif any(not isinstance(c, int) or c < 4 for c in g.cells):
        errors.append(f"grid.cells: every count must be an integer >= 4, got {list(g.cells)}")
    if len(g.lengths) != g.dim:
        errors.append(f"grid.lengths: expected {g.dim} entries, got {len(g.lengths)}")
    elif any(not isinstance(L, (int, float)) or not L > 0 for L in g.lengths):
        errors.append(f"grid.lengths: every extent must be > 0, got {list(g.lengths)}")


def _check_params(p, dim, errors):
    if not abs(p.kappa) <= 1:
        errors.append(f"params.kappa: |kappa| must be <= 1, got {p.kappa}")
    if not p.eps >= 0:
        errors.append(f"params.eps: must be >= 0, got {p.eps}")
    if not p.dt > 0:
        errors.append(f"params.dt: must be > 0, got {p.dt}")
    if not p.t_end > 0:
        errors.append(f"params.t_end: must be > 0, got {p.t_end}")
    if not 0 < p.cfl_safety <= 1:
        errors.append(f"params.cfl_safety: must lie in (0, 1], got {p.cfl_safety}")
    if p.snapshot_every < 1:
        errors.append(f"params.snapshot_every: must be >= 1, got {p.snapshot_every}")
    if len(p.phi_gradient) != dim:
        errors.append(f"params.phi_gradient: expected {dim} entries, got {len(p.phi_gradient)}")


def _check_sweep(s, errors):
    if s.parameter not in ("kappa", "eps"):
        errors.append(f"sweep.parameter: must be 'kappa' or 'eps', got {s.parameter!r}")
        return
    zeros = sum(1 for v in s.values if v == 0)
    if zeros != 1:
        errors.append(f"sweep.values: the reference value 0 must appear exactly once, found {zeros}")
    if s.parameter == "kappa" and any(abs(v) > 1 for v in s.values):
        errors.append("sweep.values: kappa values must satisfy |kappa| <= 1")
    if s.parameter == "eps" and any(v < 0 for v in s.values):
        errors.append("sweep.values: eps values must be >= 0")
    for i, entry in enumerate(s.norms):
        if not (isinstance(entry, tuple) and len(entry) == 2):
            errors.append(f"sweep.norms[{i}]: expected [component, p]")
            continue
        comp, p = entry
        if comp not in COMPONENTS:
            errors.append(f"sweep.norms[{i}]: unknown component {comp!r}")
        elif not p >= 1:
            errors.append(f"sweep.norms[{i}]: exponent must be >= 1, got {p}")
        elif s.parameter == "kappa" and not p < KAPPA_EXPONENT_LIMITS[comp]:
            errors.append(
                f"sweep.norms[{i}]: exponent {p} for {comp} outside [1, {KAPPA_EXPONENT_LIMITS[comp]:.4g})"
            )


SECTIONS = ("grid", "params", "initial", "tolerance", "output", "sweep")


def parse_config(raw: dict) -> Config:
    if not isinstance(raw, dict):
        raise ConfigError(["<root>: expected a mapping"])
    errors = [f"{k}: unknown section" for k in raw if k not in SECTIONS]
    grid = _block(GridBlock, raw.get("grid"), "grid", errors)
    params = _block(ParamsBlock, raw.get("params"), "params", errors)
    initial = _block(InitialDataSpec, raw.get("initial"), "initial", errors)
    tolerance = _block(ToleranceBlock, raw.get("tolerance"), "tolerance", errors)
    output = _block(OutputBlock, raw.get("output"), "output", errors)
    sweep = _block(SweepBlock, raw["sweep"], "sweep", errors) if raw.get("sweep") is not None else None
    if grid is not None:
        _check_grid(grid, errors)
    if params is not None:
        _check_params(params, grid.dim if grid else 2, errors)
    if tolerance is not None:
        try:
            EllipticSolveSpec(tol=tolerance.tol, max_iter=tolerance.max_iter, preconditioner=tolerance.preconditioner)
        except ValueError as exc:
            errors.append(f"tolerance: {exc}")
    if initial is not None and grid is not None and initial.center and len(initial.center) != grid.dim:
        errors.append(f"initial.center: expected {grid.dim} coordinates")
    if sweep is not None:
        _check_sweep(sweep, errors)
    if errors:
        raise ConfigError(errors)
    return Config(grid, params, initial, tolerance, output, sweep)


def load_config(path) -> Config:
    with open(path) as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError([f"<file>: not valid YAML ({exc})"]) from exc
    return parse_config(raw)
