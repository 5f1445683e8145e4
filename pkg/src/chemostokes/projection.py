"""Discrete Leray projection and the Yosida smoothing of the advecting velocity."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ScalarField, VectorField
from .operators import divergence, gradient
from .poisson import EllipticSolveSpec, solve_poisson_neumann, solve_screened


@dataclass
class ProjectionResult:
    u_sol: VectorField
    pressure: ScalarField
    div_residual: float


def leray_project(u: VectorField, spec: EllipticSolveSpec = EllipticSolveSpec()) -> ProjectionResult:
    """Split ``u = u_sol + grad(phi)`` with ``div(u_sol) = 0``.

    ``pressure`` holds the zero-mean potential ``phi``. Because the discrete
    Laplacian is exactly ``div(grad)``, the divergence left in ``u_sol`` is
    set by the solver tolerance only.
    """
    if u.boundary_normal_max() != 0.0:
        raise ValueError("velocity violates the no-slip normal condition on the walls")
    div = divergence(u)
    # no wall flux: the divergence sums to zero up to round-off
    div.values -= div.values.mean()
    phi = solve_poisson_neumann(div, spec)
    u_sol = u - gradient(phi)
    return ProjectionResult(u_sol, phi, float(np.abs(divergence(u_sol).values).max()))


def yosida(u: VectorField, eps: float, spec: EllipticSolveSpec = EllipticSolveSpec()) -> VectorField:
    """Resolvent smoothing ``P (I - eps Lap)^{-1} u``; identity at ``eps = 0``."""
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    if eps == 0:
        return u
    return leray_project(solve_screened(eps, u, spec), spec).u_sol
