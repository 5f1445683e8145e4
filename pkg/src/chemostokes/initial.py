"""Initial data generators.

Random data come from NumPy's PCG64 bit generator (``numpy.random.default_rng``
with an integer seed), whose stream is stable across platforms.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import ScalarField, VectorField
from .grid import Grid
from .projection import leray_project
from .stepper import State

GENERATORS = ("constant-plus-bump", "random-smooth", "file")


@dataclass(frozen=True)
class InitialDataSpec:
    generator: str = "constant-plus-bump"
    n_mean: float = 1.0
    n_amplitude: float = 1.0
    c_base: float = 0.5
    c_amplitude: float = 0.5
    u_amplitude: float = 0.0
    width: float = 0.15
    center: tuple = ()
    modes: int = 4
    seed: int = 0
    n_floor: float = 0.0
    c_floor: float = 1e-3
    path: str = ""
    snapshot: int = -1

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}; expected one of {GENERATORS}")
        if self.n_mean <= 0:
            raise ValueError("n_mean must be positive")
        if self.c_floor <= 0:
            raise ValueError("c_floor must be positive")
        if self.n_floor < 0:
            raise ValueError("n_floor must be nonnegative")


def _bump(grid, center, width):
    coords = grid.cell_coords()
    r2 = sum(((x - c0) / (width * L)) ** 2 for x, c0, L in zip(coords, center, grid.lengths))
    return np.exp(-0.5 * r2)


def _smooth_random(grid, rng, modes):
    """Band-limited cosine series with decaying random coefficients, scaled to max |f| = 1."""
    coords = grid.cell_coords()
    f = np.zeros(grid.shape)
    for k in np.ndindex(*([modes + 1] * grid.dim)):
        if sum(k) == 0:
            continue
        coef = rng.standard_normal() / (1.0 + sum(m * m for m in k))
        term = coef
        for m, x, L in zip(k, coords, grid.lengths):
            term = term * np.cos(m * np.pi * x / L)
        f += term
    return f / np.abs(f).max()


def _random_velocity(grid, rng, modes, amplitude):
    comps = []
    for a in range(grid.dim):
        ua = np.zeros(grid.face_shape(a))
        inner = [slice(None)] * grid.dim
        inner[a] = slice(1, -1)
        ua[tuple(inner)] = rng.standard_normal(ua[tuple(inner)].shape)
        comps.append(ua)
    u = leray_project(VectorField(grid, tuple(comps))).u_sol
    # a few implicit smoothing passes keep it band-limited-ish
    from .poisson import solve_screened
    h2 = max(grid.spacing) ** 2
    for _ in range(max(1, modes)):
        u = leray_project(solve_screened(h2, u)).u_sol
    scale = max(np.abs(c).max() for c in u.components)
    return u * (amplitude / scale) if scale > 0 else u


def make_initial_state(grid: Grid, spec: InitialDataSpec) -> State:
    """Build ``(n0, c0, u0)`` with ``n0 >= 0``, ``c0 >= c_floor`` and solenoidal no-slip ``u0``."""
    if spec.generator == "file":
        from .io import load_trajectory
        traj = load_trajectory(spec.path)
        s = traj.snapshots[spec.snapshot].copy()
        if s.grid != grid:
            raise ValueError("initial-data file lives on a different grid")
        s.t = 0.0
        return s

    rng = np.random.default_rng(spec.seed)
    if spec.generator == "constant-plus-bump":
        center = spec.center or tuple(0.5 * L for L in grid.lengths)
        if len(center) != grid.dim:
            raise ValueError(f"center needs {grid.dim} coordinates")
        center = tuple(float(x) for x in center)
        prof_n = _bump(grid, center, spec.width)
        prof_c = _bump(grid, tuple(L - x for x, L in zip(center, grid.lengths)), spec.width)
    else:
        prof_n = _smooth_random(grid, rng, spec.modes)
        prof_c = _smooth_random(grid, rng, spec.modes)

    n = 1.0 + spec.n_amplitude * prof_n
    n = np.maximum(n, spec.n_floor)
    n = n * (spec.n_mean / n.mean())
    c = np.maximum(spec.c_base + spec.c_amplitude * prof_c, spec.c_floor)
    if spec.u_amplitude > 0:
        u = _random_velocity(grid, rng, spec.modes, spec.u_amplitude)
    else:
        u = VectorField.zeros(grid)
    return State(ScalarField(grid, n), ScalarField(grid, c), u, ScalarField.zeros(grid), 0.0)
