"""Field containers and discrete norms.

All integrals use midpoint quadrature on cell centers with weight
``grid.volume_element``. Velocity magnitudes are taken after arithmetic
face-to-center averaging.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from . import _stencils as st
from .grid import Grid

COMPONENTS = ("n", "grad_n", "c", "grad_c", "u", "grad_u")


@dataclass(eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray
    bc_kind: str = "neumann-zero-flux"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"scalar values have shape {self.values.shape}, grid expects {self.grid.shape}")

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape))

    def copy(self):
        return ScalarField(self.grid, self.values.copy())

    def __add__(self, other):
        return ScalarField(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - _vals(other))

    def __mul__(self, a):
        return ScalarField(self.grid, self.values * a)

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.values)


@dataclass(eq=False)
class VectorField:
    grid: Grid
    components: tuple
    bc_kind: str = "dirichlet-zero"

    def __post_init__(self):
        comps = tuple(np.asarray(c, dtype=float) for c in self.components)
        if len(comps) != self.grid.dim:
            raise ValueError(f"expected {self.grid.dim} velocity components, got {len(comps)}")
        for a, ua in enumerate(comps):
            if ua.shape != self.grid.face_shape(a):
                raise ValueError(f"component {a} has shape {ua.shape}, expected {self.grid.face_shape(a)}")
        self.components = comps

    @classmethod
    def zeros(cls, grid):
        return cls(grid, tuple(np.zeros(grid.face_shape(a)) for a in range(grid.dim)))

    def copy(self):
        return VectorField(self.grid, tuple(c.copy() for c in self.components))

    def boundary_normal_max(self) -> float:
        """Largest |normal component| on the walls; zero for a valid no-slip field."""
        d = self.grid.dim
        m = 0.0
        for a, ua in enumerate(self.components):
            m = max(m, np.abs(ua[st.sl(d, a, 0)]).max(), np.abs(ua[st.sl(d, a, -1)]).max())
        return float(m)

    def __add__(self, other):
        return VectorField(self.grid, tuple(x + y for x, y in zip(self.components, other.components)))

    def __sub__(self, other):
        return VectorField(self.grid, tuple(x - y for x, y in zip(self.components, other.components)))

    def __mul__(self, a):
        return VectorField(self.grid, tuple(x * a for x in self.components))

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField(self.grid, tuple(-x for x in self.components))


def _vals(x):
    return x.values if isinstance(x, ScalarField) else x


def check_nonnegative(f: ScalarField, name: str) -> None:
    m = f.values.min()
    if m < 0:
        raise ValueError(f"{name} has negative entries (min {m:.3e})")


def integrate(f: ScalarField) -> float:
    return float(f.grid.volume_element * np.sum(f.values))


def center_magnitude(u: VectorField) -> np.ndarray:
    """Euclidean |u| at cell centers."""
    sq = sum(st.faces_to_centers(ua, a) ** 2 for a, ua in enumerate(u.components))
    return np.sqrt(sq)


def _check_p(p):
    if not (p == math.inf or p >= 1):
        raise ValueError(f"p must be >= 1 or inf, got {p}")


def _weighted_lp(samples, p):
    """p-th power sum over (values, weight) pairs; max |value| if p is inf."""
    if p == math.inf:
        return max(float(np.abs(v).max()) if v.size else 0.0 for v, _ in samples)
    return float(sum(np.sum(w * np.abs(v) ** p) for v, w in samples))


def _root(s, p):
    return s if p == math.inf else s ** (1.0 / p)


def lp_norm(f, p) -> float:
    """L^p norm of a scalar or vector field (``p = math.inf`` for the sup norm)."""
    _check_p(p)
    vals = f.values if isinstance(f, ScalarField) else center_magnitude(f)
    return _root(_weighted_lp([(vals, f.grid.volume_element)], p), p)


def scalar_gradient_samples(f: ScalarField):
    g = f.grid
    d = g.dim
    return [(np.diff(f.values, axis=a) / g.spacing[a], g.volume_element) for a in range(d)]


def gradient_norm_lp(f, p) -> float:
    """L^p norm of the discrete gradient.

    Scalars use the interior face differences (the zero-flux boundary faces
    contribute nothing); vectors use every first difference of the no-slip
    MAC field, so that ``gradient_norm_lp(u, 2) ** 2`` is the Dirichlet form.
    """
    _check_p(p)
    if isinstance(f, ScalarField):
        samples = scalar_gradient_samples(f)
    else:
        samples = st.velocity_gradient_samples(f.components, f.grid.spacing)
    return _root(_weighted_lp(samples, p), p)


def _component_pth(state_a, state_b, component, p):
    if component in ("n", "c"):
        diff = getattr(state_a, component) - getattr(state_b, component)
        return _weighted_lp([(diff.values, diff.grid.volume_element)], p)
    if component in ("grad_n", "grad_c"):
        name = component[5:]
        diff = getattr(state_a, name) - getattr(state_b, name)
        return _weighted_lp(scalar_gradient_samples(diff), p)
    if component == "u":
        diff = state_a.u - state_b.u
        return _weighted_lp([(center_magnitude(diff), diff.grid.volume_element)], p)
    if component == "grad_u":
        diff = state_a.u - state_b.u
        return _weighted_lp(st.velocity_gradient_samples(diff.components, diff.grid.spacing), p)
    raise ValueError(f"unknown component {component!r}; expected one of {COMPONENTS}")


def _check_comparable(run_a, run_b):
    if run_a.grid != run_b.grid:
        raise ValueError("trajectories live on different grids")
    ta, tb = run_a.times, run_b.times
    if len(ta) != len(tb) or not np.array_equal(ta, tb):
        raise ValueError("trajectories have different snapshot schedules")


def snapshot_lp_diffs(run_a, run_b, p, component) -> np.ndarray:
    """``||X_a(t_k) - X_b(t_k)||_p^p`` (sup norm if p is inf) for every snapshot."""
    _check_p(p)
    if component not in COMPONENTS:
        raise ValueError(f"unknown component {component!r}; expected one of {COMPONENTS}")
    _check_comparable(run_a, run_b)
    return np.array([_component_pth(sa, sb, component, p) for sa, sb in zip(run_a.snapshots, run_b.snapshots)])


def spacetime_lp_diff(run_a, run_b, p, component) -> float:
    """Discrete L^p(Omega x (0, T)) distance between two trajectories.

    Uses a right-endpoint rule over the shared snapshot schedule: every
    snapshot after t = 0 contributes ``snapshot_dt * ||X_a - X_b||_p^p``.
    """
    terms = snapshot_lp_diffs(run_a, run_b, p, component)[1:]
    if p == math.inf:
        return float(max(terms, default=0.0))
    return float(np.dot(np.diff(run_a.times), terms)) ** (1.0 / p)
