"""Monitored functionals, weak-form residuals and exponential-rate fits."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
import math

import numpy as np
from scipy.special import xlogy

from . import _stencils as st
from .fields import ScalarField, VectorField, center_magnitude, integrate, lp_norm
from .operators import sensitivity, uptake_rate

C_FLOOR = 1e-14

CSV_COLUMNS = (
    "t", "mass_n", "sup_c", "min_n", "div_u_inf", "energy_u", "dissipation_u",
    "quasi_energy", "l2_n_minus_mean", "l2_u",
    # extra columns
    "min_c", "sup_n_dev", "sup_u", "work_u",
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass_n: float
    sup_c: float
    min_n: float
    min_c: float
    div_u_inf: float
    energy_u: float
    dissipation_u: float
    quasi_energy: float
    l2_n_dev: float
    sup_n_dev: float
    l2_u: float
    sup_u: float
    work_u: float

    def row(self) -> list:
        d = asdict(self)
        d["l2_n_minus_mean"] = d.pop("l2_n_dev")
        return [d[c] for c in CSV_COLUMNS]

    @classmethod
    def from_row(cls, row: dict) -> "DiagnosticsRecord":
        d = {k: float(v) for k, v in row.items()}
        d["l2_n_dev"] = d.pop("l2_n_minus_mean")
        return cls(**{f.name: d[f.name] for f in fields(cls)})


@dataclass(frozen=True)
class DecayFit:
    window: tuple
    rate_mu: float
    amplitude_C: float
    r_squared: float

    def to_dict(self) -> dict:
        return {"window": list(self.window), "rate_mu": self.rate_mu,
                "amplitude_C": self.amplitude_C, "r_squared": self.r_squared}


def kinetic_energy(u: VectorField) -> float:
    """``1/2 int |u|^2`` with face quadrature (the momentum inner product)."""
    vol = u.grid.volume_element
    return 0.5 * vol * float(sum(np.sum(ua * ua) for ua in u.components))


def dissipation(u: VectorField) -> float:
    """``int |grad u|^2`` as the discrete no-slip Dirichlet form."""
    return float(sum(np.sum(w * v * v) for v, w in st.velocity_gradient_samples(u.components, u.grid.spacing)))


def fisher_signal(c: ScalarField) -> float:
    """``int |grad c|^2 / c`` on interior faces, face values of c floored at 1e-14."""
    g = c.grid
    total = 0.0
    for a in range(g.dim):
        d = g.dim
        hi = c.values[st.sl(d, a, slice(1, None))]
        lo = c.values[st.sl(d, a, slice(None, -1))]
        grad = (hi - lo) / g.spacing[a]
        total += np.sum(grad * grad / np.maximum(0.5 * (hi + lo), C_FLOOR))
    return float(g.volume_element * total)


def forcing_work(n: ScalarField, u: VectorField, phi_gradient) -> float:
    """``int n grad(phi) . u`` with n averaged onto the faces."""
    vol = n.grid.volume_element
    return vol * float(sum(
        phi_gradient[a] * np.sum(st.face_mean(n.values, a) * ua) for a, ua in enumerate(u.components)
    ))


def record(s, K0: float = 1.0, n_bar0=None, phi_gradient=None) -> DiagnosticsRecord:
    """Evaluate every monitored functional on one state.

    ``n_bar0`` defaults to the spatial mean of the state's own density; the
    entropy term uses ``n ln n = 0`` at ``n = 0``.
    """
    n, c, u = s.n, s.c, s.u
    vol = n.grid.volume_element
    n_bar0 = float(n.values.mean()) if n_bar0 is None else float(n_bar0)
    energy = kinetic_energy(u)
    entropy = vol * float(np.sum(xlogy(n.values, n.values)))
    dev = n.values - n_bar0
    work = forcing_work(n, u, phi_gradient) if phi_gradient is not None else 0.0
    return DiagnosticsRecord(
        t=float(s.t),
        mass_n=integrate(n),
        sup_c=float(c.values.max()),
        min_n=float(n.values.min()),
        min_c=float(c.values.min()),
        div_u_inf=float(np.abs(st.divergence(u.components, u.grid.spacing)).max()),
        energy_u=energy,
        dissipation_u=dissipation(u),
        quasi_energy=entropy + 0.5 * fisher_signal(c) + K0 * 2.0 * energy,
        l2_n_dev=math.sqrt(vol * float(np.sum(dev * dev))),
        sup_n_dev=float(np.abs(dev).max()),
        l2_u=lp_norm(u, 2),
        sup_u=lp_norm(u, math.inf),
        work_u=work,
    )


def detect_threshold_time(t, values, delta):
    """First sample time with ``value < delta``, or ``None`` if never crossed."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if np.any(np.diff(t) < 0):
        raise ValueError("series must be sorted by time")
    hit = np.flatnonzero(values < delta)
    return float(t[hit[0]]) if hit.size else None


def fit_decay(t, values, window) -> DecayFit:
    """Least-squares fit of ``log(value) = log(C) - mu t`` over ``window``."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    ta, tb = float(window[0]), float(window[1])
    if not tb > ta:
        raise ValueError(f"window must satisfy t_b > t_a, got {window}")
    mask = (t >= ta) & (t <= tb)
    if mask.sum() < 10:
        raise ValueError(f"need at least 10 samples in the window, got {int(mask.sum())}")
    y = values[mask]
    if np.any(y <= 0):
        raise ValueError("values in the fit window must be positive")
    x = t[mask]
    logy = np.log(y)
    slope, intercept = np.polyfit(x, logy, 1)
    resid = logy - (slope * x + intercept)
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot <= 1e-300 or ss_res <= 1e-28 * max(ss_tot, 1.0) else 1.0 - ss_res / ss_tot
    return DecayFit((ta, tb), float(-slope), float(math.exp(intercept)), float(min(max(r2, 0.0), 1.0)))


def energy_identity_residual(traj) -> tuple[np.ndarray, np.ndarray]:
    """Per-step residual of ``1/2 d/dt int|u|^2 + int|grad u|^2 - int n grad(phi).u``.

    Difference quotients use consecutive diagnostics records, the other two
    terms the new time level. Returns ``(t_k, residual_k)`` for k >= 1.
    """
    t, E = traj.series("energy_u")
    _, D = traj.series("dissipation_u")
    _, W = traj.series("work_u")
    return t[1:], np.diff(E) / np.diff(t) + D[1:] - W[1:]


# -- weak formulation ---------------------------------------------------------

def _sin2(w):
    def f(x, k):
        if k == 0:
            return np.sin(w * x) ** 2
        return -0.5 * (2 * w) ** k * np.cos(2 * w * x + k * np.pi / 2)
    return f


def _cos(w):
    return lambda x, k: w ** k * np.cos(w * x + k * np.pi / 2)


def _one(x, k):
    return np.ones_like(x) if k == 0 else np.zeros_like(x)


def _product(factors, orders, coords):
    out = 1.0
    for f, k, x in zip(factors, orders, coords):
        out = out * f(x, k)
    return out


@dataclass(frozen=True)
class TestFunctionSpec:
    """Spatial test functions for the three weak identities.

    ``kind = "constant"`` uses psi = 1 for the n and c identities,
    ``kind = "cosine"`` uses psi = prod cos(m_a pi x_a / L_a), which satisfies
    the zero-flux condition. The fluid identity always uses the solenoidal
    field obtained as the curl of a sin^2 stream function with the same mode
    numbers (at least 1), which vanishes on the walls.
    """
    kind: str = "constant"
    mode: tuple = (1, 1)

    __test__ = False


class _Scalar:
    def __init__(self, spec, grid):
        if spec.kind == "constant":
            self.factors = [_one] * grid.dim
        elif spec.kind == "cosine":
            if len(spec.mode) != grid.dim:
                raise ValueError(f"mode needs {grid.dim} entries, got {spec.mode}")
            self.factors = [_cos(m * np.pi / L) for m, L in zip(spec.mode, grid.lengths)]
        else:
            raise ValueError(f"unsupported test-function kind {spec.kind!r}")
        self.dim = grid.dim

    def value(self, coords):
        return _product(self.factors, [0] * self.dim, coords)

    def deriv(self, axis, coords):
        return _product(self.factors, [1 if b == axis else 0 for b in range(self.dim)], coords)

    def laplacian(self, coords):
        return sum(_product(self.factors, [2 if b == a else 0 for b in range(self.dim)], coords)
                   for a in range(self.dim))


class _Solenoidal:
    """Psi = (d_y s, -d_x s[, 0]) with s = prod sin^2(m_a pi x_a / L_a)."""

    def __init__(self, spec, grid):
        modes = list(spec.mode) if spec.kind == "cosine" else [1] * grid.dim
        if len(modes) != grid.dim:
            raise ValueError(f"mode needs {grid.dim} entries, got {spec.mode}")
        self.factors = [_sin2(max(int(m), 1) * np.pi / L) for m, L in zip(modes, grid.lengths)]
        self.dim = grid.dim
        # component a -> (sign, axis differentiated)
        self.terms = {0: (1.0, 1), 1: (-1.0, 0)}

    def _orders(self, a, extra=None):
        sign, axis = self.terms.get(a, (0.0, 0))
        orders = [1 if b == axis else 0 for b in range(self.dim)]
        if extra is not None:
            orders[extra] += 1
        return sign, orders

    def value(self, a, coords):
        sign, orders = self._orders(a)
        return sign * _product(self.factors, orders, coords) if sign else np.zeros_like(coords[0])

    def deriv(self, a, b, coords):
        sign, orders = self._orders(a, extra=b)
        return sign * _product(self.factors, orders, coords) if sign else np.zeros_like(coords[0])

    def laplacian(self, a, coords):
        sign, base = self._orders(a)
        if not sign:
            return np.zeros_like(coords[0])
        total = 0.0
        for b in range(self.dim):
            orders = list(base)
            orders[b] += 2
            total = total + _product(self.factors, orders, coords)
        return sign * total


@dataclass(frozen=True)
class WeakFormResidual:
    n: float
    c: float
    u: float
    quad_tol_n: float
    quad_tol_c: float
    quad_tol_u: float


def _trapezoid(t, y):
    return float(np.sum(0.5 * np.diff(t) * (y[1:] + y[:-1])))


def _variation_bound(t, y):
    """``sum dt_k |y_{k+1} - y_k|``: bounds the spread between Riemann-type rules."""
    return float(np.sum(np.diff(t) * np.abs(np.diff(y))))


def weak_form_residual(traj, spec: TestFunctionSpec = TestFunctionSpec()) -> WeakFormResidual:
    """Residuals of the three integral identities with a time-indicator test function.

    For each identity the test function is ``psi(x) 1_[0,T](t)``, so e.g. the
    cell identity reads ``int n(T) psi - int n_0 psi = int_0^T A_n(t) dt``
    with ``A_n = int n u.grad psi - int grad n.grad psi + int m(n) grad c.grad psi``.
    Time integrals use the trapezoid rule over the snapshots; the regularised
    mobility, uptake and smoothed convection of the trajectory's own ``eps``
    are used, which reduce to the unregularised terms at ``eps = 0``.
    Each ``quad_tol_*`` is the variation bound of that time integral.
    """
    from .projection import yosida

    g = traj.grid
    p = traj.params
    d = g.dim
    vol = g.volume_element
    psi = _Scalar(spec, g)
    Psi = _Solenoidal(spec, g)
    cc = g.cell_coords()
    fc = [g.face_coords(a) for a in range(d)]
    psi_c = psi.value(cc)
    lap_psi_c = psi.laplacian(cc)
    dpsi_f = [psi.deriv(a, fc[a]) for a in range(d)]
    Psi_f = [Psi.value(a, fc[a]) for a in range(d)]
    lapPsi_f = [Psi.laplacian(a, fc[a]) for a in range(d)]
    Psi_c = [Psi.value(a, cc) for a in range(d)]
    dPsi_c = [[Psi.deriv(a, b, cc) for b in range(d)] for a in range(d)]

    An, Ac, Au = [], [], []
    for s in traj.snapshots:
        n, c, u = s.n.values, s.c.values, s.u.components
        m = sensitivity(n, p.eps)
        transport_n = sum(np.sum(st.face_mean(n, a) * u[a] * dpsi_f[a]) for a in range(d))
        transport_c = sum(np.sum(st.face_mean(c, a) * u[a] * dpsi_f[a]) for a in range(d))
        taxis = sum(np.sum(st.face_mean(m, a) * st.face_gradient(c, a, g.spacing[a]) * dpsi_f[a]) for a in range(d))
        An.append(vol * (transport_n + np.sum(n * lap_psi_c) + taxis))
        Ac.append(vol * (transport_c + np.sum(c * lap_psi_c) - np.sum(uptake_rate(n, p.eps) * c * psi_c)))

        viscous = sum(np.sum(u[a] * lapPsi_f[a]) for a in range(d))
        forcing = sum(p.phi_gradient[a] * np.sum(n * Psi_c[a]) for a in range(d))
        convective = 0.0
        if p.kappa != 0:
            w = yosida(s.u, p.eps, p.elliptic_spec).components
            uc = [st.faces_to_centers(u[a], a) for a in range(d)]
            wc = [st.faces_to_centers(w[a], a) for a in range(d)]
            convective = p.kappa * sum(np.sum(wc[b] * uc[a] * dPsi_c[a][b]) for a in range(d) for b in range(d))
        Au.append(vol * (viscous + convective + forcing))

    t = traj.times
    first, last = traj.snapshots[0], traj.snapshots[-1]
    lhs_n = vol * np.sum((last.n.values - first.n.values) * psi_c)
    lhs_c = vol * np.sum((last.c.values - first.c.values) * psi_c)
    lhs_u = vol * sum(np.sum((last.u.components[a] - first.u.components[a]) * Psi_f[a]) for a in range(d))
    An, Ac, Au = (np.array(x) for x in (An, Ac, Au))
    return WeakFormResidual(
        n=abs(float(lhs_n) - _trapezoid(t, An)),
        c=abs(float(lhs_c) - _trapezoid(t, Ac)),
        u=abs(float(lhs_u) - _trapezoid(t, Au)),
        quad_tol_n=_variation_bound(t, An),
        quad_tol_c=_variation_bound(t, Ac),
        quad_tol_u=_variation_bound(t, Au),
    )
