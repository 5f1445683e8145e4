"""Discrete differential operators on the MAC grid.

Transport and taxis fluxes are first-order upwind so that explicit steps are
positivity preserving under a CFL bound. The convection term of the momentum
equation is available both as an upwind operator and as the centered skew
form whose discrete trilinear form vanishes identically.
"""
from __future__ import annotations

from dataclasses import dataclass
import warnings

import numpy as np

from . import _stencils as st
from .fields import ScalarField, VectorField
from .grid import Grid

STENCIL_KINDS = ("laplacian-neumann", "laplacian-dirichlet", "gradient", "divergence", "advection-upwind")

DIVERGENCE_WARN = 1e-6


@dataclass(frozen=True)
class StencilSpec:
    kind: str
    grid: Grid

    def __post_init__(self):
        if self.kind not in STENCIL_KINDS:
            raise ValueError(f"unknown stencil kind {self.kind!r}")

    def apply(self, *args):
        return {
            "laplacian-neumann": laplacian_neumann,
            "laplacian-dirichlet": laplacian_dirichlet,
            "gradient": gradient,
            "divergence": divergence,
            "advection-upwind": advect_scalar,
        }[self.kind](*args)


def gradient(f: ScalarField) -> VectorField:
    g = f.grid
    return VectorField(g, tuple(st.face_gradient(f.values, a, g.spacing[a]) for a in range(g.dim)))


def divergence(u: VectorField) -> ScalarField:
    return ScalarField(u.grid, st.divergence(u.components, u.grid.spacing))


def laplacian_neumann_array(f, spacing):
    return st.divergence([st.face_gradient(f, a, spacing[a]) for a in range(f.ndim)], spacing)


def laplacian_neumann(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, laplacian_neumann_array(f.values, f.grid.spacing))


def laplacian_dirichlet_component(ua, axis, spacing):
    """No-slip Laplacian of one face component; boundary faces of the result are zero."""
    d = ua.ndim
    inner = st.sl(d, axis, slice(1, -1))
    out = np.zeros_like(ua)
    acc = np.diff(ua, n=2, axis=axis) / spacing[axis] ** 2
    for b in range(d):
        if b != axis:
            acc = acc + np.diff(st.pad_antireflect(ua[inner], b), n=2, axis=b) / spacing[b] ** 2
    out[inner] = acc
    return out


def laplacian_dirichlet(u: VectorField) -> VectorField:
    sp = u.grid.spacing
    return VectorField(u.grid, tuple(laplacian_dirichlet_component(ua, a, sp) for a, ua in enumerate(u.components)))


def upwind_flux(speed, f, axis):
    """Face flux ``speed * f_upwind`` on interior faces; boundary faces carry no flux."""
    d = f.ndim
    inner = st.sl(d, axis, slice(1, -1))
    left = f[st.sl(d, axis, slice(None, -1))]
    right = f[st.sl(d, axis, slice(1, None))]
    s = speed[inner]
    flux = np.zeros_like(speed)
    flux[inner] = np.where(s > 0, s * left, s * right)
    return flux


def advect_scalar_array(comps, f, spacing):
    return st.divergence([upwind_flux(ua, f, a) for a, ua in enumerate(comps)], spacing)


def advect_scalar(u: VectorField, f: ScalarField) -> ScalarField:
    """Conservative upwind ``div(u f)``; equals ``u . grad f`` for solenoidal ``u``."""
    div = np.abs(st.divergence(u.components, u.grid.spacing)).max()
    if div > DIVERGENCE_WARN:
        warnings.warn(f"advecting velocity has divergence {div:.2e}; scalar conservation degraded", RuntimeWarning)
    return ScalarField(f.grid, advect_scalar_array(u.components, f.values, u.grid.spacing))


def sensitivity(n, eps):
    """Taxis mobility ``n / (1 + eps n)``; the eps = 0 branch is plain ``n``."""
    if eps == 0:
        return n
    return n / (1.0 + eps * n)


def uptake_rate(n, eps):
    """Consumption rate ``log(1 + eps n) / eps``; the eps = 0 branch is plain ``n``."""
    if eps == 0:
        return n
    return np.log1p(eps * n) / eps


def taxis_fluxes(n, c, eps, spacing):
    """Upwinded chemotactic face fluxes ``m(n) grad c``.

    Cells drift up the signal gradient, so the upwind cell is the one the
    gradient points away from. The mobility is monotone in ``n`` so
    upwinding it equals evaluating it on the upwinded density.
    """
    m = sensitivity(n, eps)
    return [upwind_flux(st.face_gradient(c, a, spacing[a]), m, a) for a in range(n.ndim)]


def chemotaxis_divergence(n: ScalarField, c: ScalarField, eps: float) -> ScalarField:
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    if n.values.min() < 0:
        raise ValueError(f"cell density has negative entries (min {n.values.min():.3e})")
    sp = n.grid.spacing
    return ScalarField(n.grid, st.divergence(taxis_fluxes(n.values, c.values, eps, sp), sp))


def consumption(n: ScalarField, c: ScalarField, eps: float) -> ScalarField:
    """Pointwise signal uptake ``k(n) c``."""
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    if n.values.min() < 0 or c.values.min() < 0:
        raise ValueError("consumption needs nonnegative n and c")
    return ScalarField(n.grid, uptake_rate(n.values, eps) * c.values)


def _advecting_at_faces(w_comps, axis, spacing):
    """Velocity ``w`` interpolated to the interior faces normal to ``axis``.

    Returns one array per component of ``w``, each shaped like the interior
    slab of the ``axis`` faces.
    """
    d = len(w_comps)
    out = []
    for b, wb in enumerate(w_comps):
        if b == axis:
            out.append(wb[st.sl(d, axis, slice(1, -1))])
        else:
            # average to cell centers along b, then to faces along axis
            cb = st.faces_to_centers(wb, b)
            out.append(st.faces_to_centers(cb, axis))
    return out


def advect_velocity_array(w_comps, u_comps, spacing):
    d = len(u_comps)
    result = []
    for a, ua in enumerate(u_comps):
        inner = st.sl(d, a, slice(1, -1))
        w_at = _advecting_at_faces(w_comps, a, spacing)
        acc = np.zeros(tuple(s - (2 if k == a else 0) for k, s in enumerate(ua.shape)))
        for b in range(d):
            if b == a:
                padded = ua
                core = ua[inner]
                back = (core - ua[st.sl(d, a, slice(None, -2))]) / spacing[a]
                fwd = (ua[st.sl(d, a, slice(2, None))] - core) / spacing[a]
            else:
                padded = st.pad_antireflect(ua[inner], b)
                core = ua[inner]
                back = (core - padded[st.sl(d, b, slice(None, -2))]) / spacing[b]
                fwd = (padded[st.sl(d, b, slice(2, None))] - core) / spacing[b]
            acc += np.where(w_at[b] > 0, w_at[b] * back, w_at[b] * fwd)
        out = np.zeros_like(ua)
        out[inner] = acc
        result.append(out)
    return result


def advect_velocity(w: VectorField, u: VectorField) -> VectorField:
    """Upwind ``(w . grad) u`` on the faces, no-slip ghosts on transverse walls."""
    return VectorField(u.grid, tuple(advect_velocity_array(w.components, u.components, u.grid.spacing)))


def _flux_point_velocity(w_comps, a, b, spacing):
    """``w_b`` at the midpoints between neighbouring ``a``-faces along ``b``.

    For b == a these are cell centers; for b != a they are edge points lying
    on the b-face planes, including the walls where ``w_b`` vanishes.
    """
    d = len(w_comps)
    wb = w_comps[b]
    if b == a:
        return st.faces_to_centers(wb, b)
    # w_b lives on b-faces: average along a onto the a-face positions (interior only)
    return 0.5 * (wb[st.sl(d, a, slice(1, None))] + wb[st.sl(d, a, slice(None, -1))])


def skew_advect_array(w_comps, u_comps, spacing):
    """Centered skew form ``1/2 [(w.grad)u + div(w (x) u)]`` on the interior faces.

    Per direction this is ``[W(x+h/2) u(x+h) - W(x-h/2) u(x-h)] / (2h)``,
    a skew-symmetric matrix whenever ``w`` has zero normal component on the
    walls, so ``<skew(w, u), u> = 0`` up to round-off.
    """
    d = len(u_comps)
    result = []
    for a, ua in enumerate(u_comps):
        inner = st.sl(d, a, slice(1, -1))
        core_shape = ua[inner].shape
        acc = np.zeros(core_shape)
        for b in range(d):
            W = _flux_point_velocity(w_comps, a, b, spacing)
            if b == a:
                # neighbours along a include the zero boundary faces
                up = ua[st.sl(d, a, slice(2, None))]
                dn = ua[st.sl(d, a, slice(None, -2))]
                Wp = W[st.sl(d, a, slice(1, None))]
                Wm = W[st.sl(d, a, slice(None, -1))]
            else:
                padded = st.pad_antireflect(ua[inner], b)
                up = padded[st.sl(d, b, slice(2, None))]
                dn = padded[st.sl(d, b, slice(None, -2))]
                Wi = W[inner] if W.shape[a] == ua.shape[a] else W
                Wp = Wi[st.sl(d, b, slice(1, None))]
                Wm = Wi[st.sl(d, b, slice(None, -1))]
            acc += (Wp * up - Wm * dn) / (2.0 * spacing[b])
        out = np.zeros_like(ua)
        out[inner] = acc
        result.append(out)
    return result


def skew_advect(w: VectorField, u: VectorField) -> VectorField:
    return VectorField(u.grid, tuple(skew_advect_array(w.components, u.components, u.grid.spacing)))


def buoyancy_force(n: ScalarField, phi_gradient) -> VectorField:
    """``n grad(phi)`` on the faces for a linear potential (constant gradient)."""
    g = n.grid
    return VectorField(g, tuple(st.face_mean(n.values, a) * float(phi_gradient[a]) for a in range(g.dim)))
