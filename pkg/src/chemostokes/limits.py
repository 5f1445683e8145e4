"""kappa -> 0 and eps -> 0 sweeps against a shared reference run."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import csv
import json
import math

import numpy as np

from .diagnostics import fit_decay
from .fields import COMPONENTS, snapshot_lp_diffs
from .stepper import Params, State, integrate_run

# largest admissible exponent (exclusive) per component for kappa sweeps
KAPPA_EXPONENT_LIMITS = {
    "n": 5 / 3,
    "grad_n": 5 / 4,
    "c": math.inf,
    "grad_c": 4.0,
    "u": 10 / 3,
    "grad_u": 2.0,
}

CSV_FIELDS = ("value", "component", "p", "norm", "ratio", "status", "tail", "norm_with_tail")


@dataclass
class SweepSpec:
    parameter: str
    values: list
    base_params: Params
    initial: State
    norms: list = field(default_factory=lambda: [("u", 2.0)])

    def __post_init__(self):
        self.values = [float(v) for v in self.values]
        self.norms = [(str(c), float(p)) for c, p in self.norms]
        self.validate()

    def validate(self):
        if self.parameter not in ("kappa", "eps"):
            raise ValueError(f"sweep parameter must be 'kappa' or 'eps', got {self.parameter!r}")
        zeros = sum(1 for v in self.values if v == 0)
        if zeros != 1:
            raise ValueError(f"sweep values must contain the reference value 0 exactly once, found {zeros}")
        if self.parameter == "kappa" and any(abs(v) > 1 for v in self.values):
            raise ValueError("kappa sweep values must satisfy |kappa| <= 1")
        if self.parameter == "eps" and any(v < 0 for v in self.values):
            raise ValueError("eps sweep values must be >= 0")
        for comp, p in self.norms:
            if comp not in COMPONENTS:
                raise ValueError(f"unknown component {comp!r}")
            if not p >= 1:
                raise ValueError(f"exponent for {comp} must be >= 1, got {p}")
            if self.parameter == "kappa" and not p < KAPPA_EXPONENT_LIMITS[comp]:
                raise ValueError(
                    f"exponent {p} for {comp} outside the admissible range [1, {KAPPA_EXPONENT_LIMITS[comp]:.4g})"
                )

    def member_params(self, value) -> Params:
        return replace(self.base_params, **{self.parameter: value})


@dataclass
class Row:
    value: float
    component: str
    p: float
    norm: float
    ratio: float = math.nan
    status: str = "ok"
    tail: float = math.nan

    @property
    def norm_with_tail(self) -> float:
        if math.isnan(self.tail):
            return math.nan
        return (self.norm ** self.p + self.tail ** self.p) ** (1.0 / self.p)

    def as_list(self):
        return [self.value, self.component, self.p, self.norm, self.ratio, self.status, self.tail, self.norm_with_tail]


@dataclass
class ConvergenceTable:
    parameter: str
    rows: list
    provenance: dict = field(default_factory=dict)

    def column(self, component, p, include_reference=False):
        rows = [r for r in self.rows if r.component == component and r.p == float(p)]
        if not include_reference:
            rows = [r for r in rows if r.value != 0]
        return rows

    def is_monotone(self, component, p) -> bool:
        """Strictly decreasing norms as |value| decreases (reference row excluded)."""
        norms = [r.norm for r in self.column(component, p) if r.status == "ok"]
        return all(a > b for a, b in zip(norms, norms[1:]))

    def monotonicity(self) -> dict:
        return {f"{c}:{p:g}": self.is_monotone(c, p) for c, p in dict.fromkeys((r.component, r.p) for r in self.rows)}

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_FIELDS)
            for r in self.rows:
                w.writerow([repr(float(x)) if isinstance(x, float) else x for x in r.as_list()])

    def write_json(self, path):
        doc = dict(self.provenance)
        doc.update({
            "parameter": self.parameter,
            "rows": [dict(zip(CSV_FIELDS, r.as_list())) for r in self.rows],
            "monotone": self.monotonicity(),
        })
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True, default=_json_default)


def _json_default(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    raise TypeError(type(x))


def _run_member(args):
    initial, params = args
    try:
        return integrate_run(initial, params), None
    except Exception as exc:  # noqa: BLE001 - member failure is recorded, not raised
        return None, f"failed: {exc}"


def _tail_estimate(t, pth, p):
    """Estimated ``(int_T^inf ||diff||_p^p dt)^(1/p)`` from an exponential fit of the last half."""
    if t.size < 20:
        return math.nan
    norms = pth ** (1.0 / p)
    half = t[-1] / 2
    window = norms[t >= half]
    if np.any(window <= 0):
        return 0.0 if np.all(window == 0) else math.nan
    try:
        fit = fit_decay(t, norms, (half, t[-1]))
    except ValueError:
        return math.nan
    if fit.rate_mu <= 0:
        return math.inf
    return float((norms[-1] ** p / (p * fit.rate_mu)) ** (1.0 / p))


def _sweep(spec: SweepSpec, workers: int = 1, runner=None) -> ConvergenceTable:
    spec.validate()
    values = sorted(spec.values, key=lambda v: -abs(v))
    jobs = [(spec.initial, spec.member_params(v)) for v in values]
    if runner is not None:
        results = [runner(j) for j in jobs]
    elif workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_member, jobs))
    else:
        results = [_run_member(j) for j in jobs]

    by_value = dict(zip(values, results))
    ref, ref_err = by_value[0.0]
    if ref is None:
        raise RuntimeError(f"reference run ({spec.parameter} = 0) {ref_err}")

    rows = []
    for comp, p in spec.norms:
        prev = None
        for v in values:
            run, err = by_value[v]
            if run is None:
                rows.append(Row(v, comp, p, math.nan, status=err))
                continue
            pth = snapshot_lp_diffs(run, ref, p, comp)
            t = run.times
            norm = float(np.dot(np.diff(t), pth[1:])) ** (1.0 / p)
            row = Row(v, comp, p, norm, tail=_tail_estimate(t, pth, p) if v != 0 else 0.0)
            if prev is not None and v != 0 and norm > 0:
                row.ratio = prev / norm
            prev = norm if v != 0 else prev
            rows.append(row)
    bp = spec.base_params
    provenance = {
        "grid": spec.initial.grid.to_dict(),
        "dt": bp.dt,
        "horizon": ref.times[-1],
        "values": values,
        "norms": [[c, p] for c, p in spec.norms],
        "base_params": bp.to_dict(),
    }
    return ConvergenceTable(spec.parameter, rows, provenance)


def run_member(job):
    """Default member executor: ``(initial, params) -> (trajectory | None, error | None)``."""
    return _run_member(job)


def kappa_sweep(spec: SweepSpec, workers: int = 1, runner=None) -> ConvergenceTable:
    """Difference norms of every kappa run against the kappa = 0 (Stokes) run.

    ``runner`` replaces :func:`run_member` and forces serial execution.
    """
    if spec.parameter != "kappa":
        raise ValueError("kappa_sweep needs parameter = 'kappa'")
    return _sweep(spec, workers, runner)


def eps_sweep(spec: SweepSpec, workers: int = 1, runner=None) -> ConvergenceTable:
    """Difference norms of every eps run against the unregularised eps = 0 run."""
    if spec.parameter != "eps":
        raise ValueError("eps_sweep needs parameter = 'eps'")
    return _sweep(spec, workers, runner)
