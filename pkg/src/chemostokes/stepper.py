"""Time integration of the regularised chemotaxis-(Navier-)Stokes system.

One step is the fixed splitting c -> n -> u:

* signal: explicit upwind transport, implicit diffusion, implicit uptake
  ``c_new = c* / (1 + dt k(n))``;
* cells: explicit upwind transport and taxis, implicit diffusion;
* fluid: explicit skew convection with the smoothed velocity, buoyancy,
  implicit viscosity, then projection.

Explicit transport is sub-cycled inside a step whenever the upwind
positivity bound would be violated, so the snapshot schedule (and hence
cross-run comparisons) never depends on the data.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
import json
import math
from pathlib import Path

import numpy as np

from . import _stencils as st
from .fields import ScalarField, VectorField
from .grid import Grid
from .operators import (
    advect_scalar_array,
    buoyancy_force,
    skew_advect,
    taxis_fluxes,
    uptake_rate,
)
from .poisson import EllipticSolveSpec, solve_screened
from .projection import leray_project, yosida

DT_FLOOR = 1e-12


class CFLError(RuntimeError):
    pass


class StepError(RuntimeError):
    def __init__(self, t, cause):
        super().__init__(f"step failed at t={t:.6g}: {cause}")
        self.t = t
        self.cause = cause


@dataclass(frozen=True)
class Params:
    kappa: float = 0.0
    eps: float = 0.0
    phi_gradient: tuple = (0.0, -1.0)
    dt: float = 1e-3
    t_end: float = 1.0
    snapshot_every: int = 1
    elliptic_spec: EllipticSolveSpec = EllipticSolveSpec()
    cfl_safety: float = 0.9
    K0: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "phi_gradient", tuple(float(x) for x in self.phi_gradient))
        if not abs(self.kappa) <= 1:
            raise ValueError(f"kappa must satisfy |kappa| <= 1, got {self.kappa}")
        if not self.eps >= 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if not (self.dt > 0 and self.t_end > 0):
            raise ValueError("dt and t_end must be positive")
        if self.snapshot_every < 1:
            raise ValueError(f"snapshot_every must be >= 1, got {self.snapshot_every}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["phi_gradient"] = list(self.phi_gradient)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Params":
        d = dict(d)
        if isinstance(d.get("elliptic_spec"), dict):
            d["elliptic_spec"] = EllipticSolveSpec(**d["elliptic_spec"])
        return cls(**d)


@dataclass
class State:
    n: ScalarField
    c: ScalarField
    u: VectorField
    pressure: ScalarField
    t: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.n.grid

    def copy(self) -> "State":
        return State(self.n.copy(), self.c.copy(), self.u.copy(), self.pressure.copy(), self.t)


def _outflow_rate(speeds, spacing):
    """Per-cell sum of outgoing face speeds over h (upwind positivity rate)."""
    rate = 0.0
    for a, v in enumerate(speeds):
        d = v.ndim
        rate = rate + (np.maximum(v[st.sl(d, a, slice(1, None))], 0.0)
                       + np.maximum(-v[st.sl(d, a, slice(None, -1))], 0.0)) / spacing[a]
    return rate


def _substeps(dt, rate, safety):
    r = float(np.max(rate)) if np.ndim(rate) else float(rate)
    m = max(1, math.ceil(dt * r / safety))
    if dt / m < DT_FLOOR:
        raise CFLError(f"transport CFL needs a sub-step below {DT_FLOOR:g}")
    return m


def step_c(s: State, p: Params) -> ScalarField:
    g = s.grid
    sp = g.spacing
    u = s.u.components
    c = s.c.values
    m = _substeps(p.dt, _outflow_rate(u, sp), p.cfl_safety)
    h = p.dt / m
    for _ in range(m):
        c = c - h * advect_scalar_array(u, c, sp)
    c_star = solve_screened(p.dt, ScalarField(g, c), p.elliptic_spec).values
    return ScalarField(g, c_star / (1.0 + p.dt * uptake_rate(s.n.values, p.eps)))


def step_n(s: State, p: Params) -> ScalarField:
    g = s.grid
    sp = g.spacing
    u = s.u.components
    n = s.n.values
    grad_c = [st.face_gradient(s.c.values, a, sp[a]) for a in range(g.dim)]
    rate = _outflow_rate(u, sp) + _outflow_rate(grad_c, sp)
    m = _substeps(p.dt, rate, p.cfl_safety)
    h = p.dt / m
    for _ in range(m):
        taxis = st.divergence(taxis_fluxes(n, s.c.values, p.eps, sp), sp)
        n = n - h * (advect_scalar_array(u, n, sp) + taxis)
    return solve_screened(p.dt, ScalarField(g, n), p.elliptic_spec)


def step_u(s: State, p: Params):
    """Advance the velocity; returns ``(u_new, pressure)``.

    The explicit forcing is projected before the viscous solve as well as
    after it; otherwise the viscous resolvent turns the gradient part of the
    buoyancy into a spurious steady flow of size O(dt).
    ``pressure`` follows the ``+grad P`` convention of the momentum equation.
    """
    force = buoyancy_force(s.n, p.phi_gradient)
    if p.kappa != 0:
        w = yosida(s.u, p.eps, p.elliptic_spec)
        force = force - p.kappa * skew_advect(w, s.u)
    explicit = leray_project(force, p.elliptic_spec)
    u_star = solve_screened(p.dt, s.u + p.dt * explicit.u_sol, p.elliptic_spec)
    proj = leray_project(u_star, p.elliptic_spec)
    pressure = explicit.pressure * -1.0 + proj.pressure * (-1.0 / p.dt)
    return proj.u_sol, pressure


def advance(s: State, p: Params) -> State:
    """One full c -> n -> u step."""
    c_new = step_c(s, p)
    s1 = State(s.n, c_new, s.u, s.pressure, s.t)
    n_new = step_n(s1, p)
    s2 = State(n_new, c_new, s.u, s.pressure, s.t)
    u_new, pressure = step_u(s2, p)
    return State(n_new, c_new, u_new, pressure, s.t + p.dt)


def check_initial(s: State, tol: float = 1e-8) -> None:
    if s.n.values.min() < 0 or s.n.values.sum() <= 0:
        raise ValueError("initial cell density must be nonnegative and not identically zero")
    if s.c.values.min() <= 0:
        raise ValueError("initial signal concentration must be positive")
    if s.u.boundary_normal_max() != 0.0:
        raise ValueError("initial velocity violates the no-slip normal condition")
    div = np.abs(st.divergence(s.u.components, s.grid.spacing)).max()
    if div > tol:
        raise ValueError(f"initial velocity is not divergence-free (max |div u| = {div:.3e})")


@dataclass
class Trajectory:
    grid: Grid
    params: Params
    snapshots: list
    records: list
    n_steps: int
    provenance: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def final(self) -> State:
        return self.snapshots[-1]

    def series(self, name):
        """``(t, values)`` arrays of one diagnostics column, initial record included."""
        t = np.array([r.t for r in self.records])
        return t, np.array([getattr(r, name) for r in self.records])

    def save(self, path):
        from .io import save_trajectory
        return save_trajectory(self, path)

    @classmethod
    def load(cls, path):
        from .io import load_trajectory
        return load_trajectory(path)


def integrate_run(initial: State, p: Params, progress=None) -> Trajectory:
    """Integrate to ``p.t_end`` and collect snapshots and per-step diagnostics."""
    from .diagnostics import record

    check_initial(initial)
    n_bar0 = initial.n.values.mean()
    s = initial.copy()
    snapshots = [s]
    records = [record(s, p.K0, n_bar0=n_bar0, phi_gradient=p.phi_gradient)]
    for k in range(1, p.n_steps + 1):
        try:
            s = advance(s, p)
        except Exception as exc:  # noqa: BLE001 - re-raised with the failing time
            raise StepError(s.t, exc) from exc
        s.t = k * p.dt
        records.append(record(s, p.K0, n_bar0=n_bar0, phi_gradient=p.phi_gradient))
        if k % p.snapshot_every == 0 or k == p.n_steps:
            snapshots.append(s)
        if progress is not None:
            progress(k)
    return Trajectory(initial.grid, p, snapshots, records, p.n_steps)
