"""Elliptic solves: zero-mean Neumann Poisson and screened ``(I - alpha Lap)`` problems.

Both are solved with preconditioned conjugate gradients. On the uniform box
the discrete Laplacians are diagonalised by real trigonometric transforms
(DCT-II for zero-flux cell data, DST-I for wall-normal face data, DST-II for
no-slip transverse data), which gives an exact preconditioner; CG then only
polishes round-off. A Jacobi preconditioner is kept for comparison.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
import warnings

import numpy as np
from scipy import fft

from . import _stencils as st
from .fields import ScalarField, VectorField
from .grid import Grid
from .operators import laplacian_dirichlet_component, laplacian_neumann_array

SOLVE_KINDS = ("poisson-neumann", "helmholtz-neumann", "helmholtz-dirichlet")
PRECONDITIONERS = ("spectral", "jacobi", "none")


class SolverError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (relative residual {residual:.3e})")
        self.residual = residual


class CompatibilityWarning(RuntimeWarning):
    """Neumann right-hand side had nonzero mean; the mean was removed."""


@dataclass(frozen=True)
class EllipticSolveSpec:
    kind: str = "poisson-neumann"
    alpha: float = 0.0
    tol: float = 1e-10
    max_iter: int = 500
    preconditioner: str = "spectral"

    def __post_init__(self):
        if self.kind not in SOLVE_KINDS:
            raise ValueError(f"unknown solve kind {self.kind!r}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not (0 < self.tol <= 1e-4):
            raise ValueError(f"tol must lie in (0, 1e-4], got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.preconditioner not in PRECONDITIONERS:
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


@dataclass
class SolveInfo:
    iterations: int
    residual: float
    history: list


def pcg(apply_A, b, precond, tol, max_iter, project=None, x0=None, callback=None):
    """Preconditioned CG for a symmetric positive (semi)definite operator.

    ``project`` removes a nullspace component from iterates and residuals;
    ``callback(x)`` sees every iterate, the initial guess included.
    Returns ``(x, SolveInfo)``; raises :class:`SolverError` if the relative
    residual is still above ``tol`` after ``max_iter`` iterations.
    """
    proj = project or (lambda v: v)
    b = proj(b)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), SolveInfo(0, 0.0, [0.0])
    x = proj(precond(b) if x0 is None else x0.copy())
    r = proj(b - apply_A(x))
    if callback is not None:
        callback(x)
    history = [np.linalg.norm(r) / bnorm]
    if history[-1] <= tol:
        return x, SolveInfo(0, history[-1], history)
    z = proj(precond(r))
    p = z.copy()
    rz = np.vdot(r, z)
    for it in range(1, max_iter + 1):
        Ap = apply_A(p)
        step = rz / np.vdot(p, Ap)
        x = proj(x + step * p)
        r = proj(r - step * Ap)
        if callback is not None:
            callback(x)
        history.append(np.linalg.norm(r) / bnorm)
        if history[-1] <= tol:
            return x, SolveInfo(it, history[-1], history)
        z = proj(precond(r))
        rz_new = np.vdot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(f"CG did not converge in {max_iter} iterations", history[-1])


# -- trigonometric diagonalisation ------------------------------------------

def _eigenvalues(kind, N, h):
    if kind == "neumann":
        k = np.arange(N)
    elif kind == "node":
        k = np.arange(1, N)
    else:
        k = np.arange(1, N + 1)
    return -(2.0 / h * np.sin(np.pi * k / (2 * N))) ** 2


def _forward(x, kind, axis):
    if kind == "neumann":
        return fft.dct(x, type=2, axis=axis, norm="ortho")
    return fft.dst(x, type=1 if kind == "node" else 2, axis=axis, norm="ortho")


def _inverse(x, kind, axis):
    if kind == "neumann":
        return fft.idct(x, type=2, axis=axis, norm="ortho")
    return fft.idst(x, type=1 if kind == "node" else 2, axis=axis, norm="ortho")


def _axis_kinds(grid, location):
    """Per-axis boundary kind for cell data (location None) or face component ``location``."""
    if location is None:
        return ("neumann",) * grid.dim
    return tuple("node" if b == location else "cell" for b in range(grid.dim))


@lru_cache(maxsize=64)
def _symbol(grid: Grid, location, alpha, poisson):
    kinds = _axis_kinds(grid, location)
    lam = 0.0
    for a, kind in enumerate(kinds):
        shape = [1] * grid.dim
        ev = _eigenvalues(kind, grid.cells[a], grid.spacing[a])
        shape[a] = ev.size
        lam = lam + ev.reshape(shape)
    if poisson:
        sym = -lam
        inv = np.zeros_like(sym)
        nz = sym != 0
        inv[nz] = 1.0 / sym[nz]
        return kinds, inv
    return kinds, 1.0 / (1.0 - alpha * lam)


def _spectral_apply(r, grid, location, alpha, poisson):
    kinds, inv = _symbol(grid, location, float(alpha), poisson)
    y = r
    for a, kind in enumerate(kinds):
        y = _forward(y, kind, a)
    y = y * inv
    for a, kind in enumerate(kinds):
        y = _inverse(y, kind, a)
    return y


@lru_cache(maxsize=64)
def _jacobi_diag(grid: Grid, location, alpha, poisson):
    """Diagonal of ``-Lap`` (poisson) or ``I - alpha Lap`` on the unknowns."""
    kinds = _axis_kinds(grid, location)
    diag = 0.0
    for a, kind in enumerate(kinds):
        h2 = grid.spacing[a] ** 2
        if kind == "neumann":
            d = np.full(grid.cells[a], 2.0 / h2)
            d[[0, -1]] = 1.0 / h2
        elif kind == "node":
            d = np.full(grid.cells[a] - 1, 2.0 / h2)
        else:
            d = np.full(grid.cells[a], 2.0 / h2)
            d[[0, -1]] = 3.0 / h2
        shape = [1] * grid.dim
        shape[a] = d.size
        diag = diag + d.reshape(shape)
    return diag if poisson else 1.0 + alpha * diag


def _preconditioner(spec, grid, location, alpha, poisson):
    if spec.preconditioner == "spectral":
        return lambda r: _spectral_apply(r, grid, location, alpha, poisson)
    if spec.preconditioner == "jacobi":
        diag = _jacobi_diag(grid, location, float(alpha), poisson)
        return lambda r: r / diag
    return lambda r: r


def _zero_mean(v):
    return v - v.mean()


def solve_poisson_neumann(rhs: ScalarField, spec: EllipticSolveSpec = EllipticSolveSpec(), info=None) -> ScalarField:
    """Zero-mean ``phi`` with ``Lap phi = rhs`` under zero-flux conditions.

    A right-hand side with nonzero integral is not solvable; its mean is
    removed and a :class:`CompatibilityWarning` is emitted.
    """
    g = rhs.grid
    b = rhs.values
    scale = np.abs(b).sum()
    if abs(b.sum()) > 1e-10 * max(scale, np.finfo(float).tiny):
        warnings.warn("Neumann Poisson right-hand side has nonzero mean; subtracting it", CompatibilityWarning)
    sp = g.spacing
    x, sinfo = pcg(
        lambda v: -laplacian_neumann_array(v, sp),
        -b,
        _preconditioner(spec, g, None, 0.0, True),
        spec.tol,
        spec.max_iter,
        project=_zero_mean,
    )
    if info is not None:
        info.append(sinfo)
    return ScalarField(g, x)


def solve_screened(alpha, rhs, spec: EllipticSolveSpec = EllipticSolveSpec("helmholtz-neumann"), info=None):
    """Solve ``(I - alpha Lap) w = rhs``.

    Scalars use the zero-flux Laplacian, vectors the componentwise no-slip
    Laplacian (boundary normal faces stay zero).
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    g = rhs.grid
    sp = g.spacing
    if isinstance(rhs, ScalarField):
        x, sinfo = pcg(
            lambda v: v - alpha * laplacian_neumann_array(v, sp),
            rhs.values,
            _preconditioner(spec, g, None, alpha, False),
            spec.tol,
            spec.max_iter,
        )
        if info is not None:
            info.append(sinfo)
        return ScalarField(g, x)
    comps = []
    for a, ua in enumerate(rhs.components):
        inner = st.sl(g.dim, a, slice(1, -1))

        def apply_A(v, a=a, inner=inner, shape=ua.shape):
            full = np.zeros(shape)
            full[inner] = v
            return v - alpha * laplacian_dirichlet_component(full, a, sp)[inner]

        x, sinfo = pcg(apply_A, ua[inner], _preconditioner(spec, g, a, alpha, False), spec.tol, spec.max_iter)
        if info is not None:
            info.append(sinfo)
        out = np.zeros(ua.shape)
        out[inner] = x
        comps.append(out)
    return VectorField(g, tuple(comps))


def with_kind(spec: EllipticSolveSpec, kind: str, alpha: float = 0.0) -> EllipticSolveSpec:
    return replace(spec, kind=kind, alpha=alpha)
