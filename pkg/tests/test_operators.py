from hypothesis import given, settings, strategies as hst
import numpy as np
import pytest

from chemostokes import ScalarField, VectorField, make_grid
from chemostokes.operators import (
    StencilSpec, advect_scalar, advect_velocity, buoyancy_force, chemotaxis_divergence, consumption,
    divergence, gradient, laplacian_dirichlet, laplacian_neumann, sensitivity, skew_advect, uptake_rate,
)
from conftest import random_faces, random_solenoidal
import oracles


def _cos_profile(N, L=2.0):
    g = make_grid(2, [N, 4], [L, 1.0])
    x = g.cell_coords()[0]
    return g, np.cos(np.pi * x / L), (np.pi / L) ** 2


def test_neumann_laplacian_of_constant_is_zero(g8):
    assert np.abs(laplacian_neumann(ScalarField.constant(g8, 3.0)).values).max() == 0.0


def test_neumann_eigenfunction_second_order():
    errs = []
    for N in (16, 32, 64):
        g, f, lam = _cos_profile(N)
        errs.append(np.abs(laplacian_neumann(ScalarField(g, f)).values + lam * f).max())
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.02)


def test_neumann_laplacian_dense_oracle(rng):
    g = make_grid(2, [4, 4], [1.0, 1.7])
    f = rng.standard_normal(g.shape)
    expected = (oracles.neumann_laplacian(g) @ f.ravel()).reshape(g.shape)
    np.testing.assert_allclose(laplacian_neumann(ScalarField(g, f)).values, expected, rtol=0, atol=1e-12 * np.abs(expected).max())


def test_dirichlet_laplacian_zero_and_oracle(rng):
    g = make_grid(2, [4, 4], [1.0, 1.7])
    assert all(np.all(c == 0) for c in laplacian_dirichlet(VectorField.zeros(g)).components)
    u = random_faces(g, rng)
    expected = oracles.dirichlet_laplacian(g) @ oracles.pack_faces(g, u.components)
    got = oracles.pack_faces(g, laplacian_dirichlet(u).components)
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-12 * np.abs(expected).max())


def test_dirichlet_eigenfunction_second_order():
    errs = []
    for N in (16, 32, 64):
        g = make_grid(2, [N, N], [1.0, 1.0])
        # sin(pi x) vanishes on the normal walls; sin(pi y) exercises the anti-reflected ghosts
        x, y = g.face_coords(0)
        u0 = np.sin(np.pi * x) * np.sin(np.pi * y)
        u0[0] = u0[-1] = 0.0
        u = VectorField(g, (u0, np.zeros(g.face_shape(1))))
        lap = laplacian_dirichlet(u).components[0]
        errs.append(np.abs(lap[1:-1] + 2 * np.pi ** 2 * u0[1:-1]).max())
    assert errs[0] / errs[1] > 1.9 and errs[1] / errs[2] > 1.9


def test_adjointness(rng):
    g = make_grid(2, [7, 5], [1.0, 0.6])
    f = ScalarField(g, rng.standard_normal(g.shape))
    v = random_faces(g, rng)
    lhs = sum(np.sum(gu * vu) for gu, vu in zip(gradient(f).components, v.components))
    rhs = -np.sum(f.values * divergence(v).values)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    np.testing.assert_allclose(oracles.pack_faces(g, gradient(f).components),
                               oracles.gradient_matrix(g) @ f.values.ravel(), atol=1e-12)


def test_stencil_spec_dispatch(g8, rng):
    f = ScalarField(g8, rng.standard_normal(g8.shape))
    np.testing.assert_array_equal(StencilSpec("laplacian-neumann", g8).apply(f).values, laplacian_neumann(f).values)
    with pytest.raises(ValueError):
        StencilSpec("biharmonic", g8)


def test_advect_scalar_basic_cases(g8, rng):
    f = ScalarField(g8, rng.random(g8.shape))
    assert np.all(advect_scalar(VectorField.zeros(g8), f).values == 0)
    u = random_solenoidal(g8, rng)
    assert np.abs(advect_scalar(u, ScalarField.constant(g8, 2.5)).values).max() < 1e-12
    with pytest.warns(RuntimeWarning):
        advect_scalar(random_faces(g8, rng), f)


def test_advect_scalar_hand_stencil():
    g = make_grid(2, [8, 4], [1.0, 1.0])
    h = g.spacing[0]
    a = 0.7
    u0 = np.full(g.face_shape(0), a)
    u0[0] = u0[-1] = 0.0
    u = VectorField(g, (u0, np.zeros(g.face_shape(1))))
    prof = np.arange(8.0) ** 2
    f = ScalarField(g, np.repeat(prof[:, None], 4, axis=1))
    with pytest.warns(RuntimeWarning):  # the wall-stopped flow is compressive at both ends
        out = advect_scalar(u, f).values[:, 0]
    expected = np.empty(8)
    expected[0] = a * prof[0] / h
    expected[1:-1] = a * (prof[1:-1] - prof[:-2]) / h
    expected[-1] = -a * prof[-2] / h
    np.testing.assert_allclose(out, expected, rtol=1e-14)
    np.testing.assert_allclose(oracles.upwind_divergence(g, u.components, f.values)[:, 0], expected, rtol=1e-14)


def test_flux_forms_conserve_integral(rng):
    g = make_grid(2, [9, 7], [1.0, 1.3])
    n = ScalarField(g, rng.random(g.shape))
    c = ScalarField(g, rng.random(g.shape))
    u = random_solenoidal(g, rng)
    for out in (advect_scalar(u, n), chemotaxis_divergence(n, c, 0.0), chemotaxis_divergence(n, c, 0.3),
                laplacian_neumann(n)):
        assert abs(out.values.sum()) <= 1e-12 * np.abs(out.values).sum()


def test_chemotaxis_divergence_cases(g8, rng):
    n = ScalarField(g8, rng.random(g8.shape))
    c = ScalarField(g8, rng.random(g8.shape))
    assert np.all(chemotaxis_divergence(n, ScalarField.constant(g8, 0.4), 0.1).values == 0)
    assert np.all(chemotaxis_divergence(ScalarField.zeros(g8), c, 0.1).values == 0)
    with pytest.raises(ValueError):
        chemotaxis_divergence(n * -1.0, c, 0.1)
    with pytest.raises(ValueError):
        chemotaxis_divergence(n, c, -0.1)
    oracle = oracles.upwind_divergence(g8, oracles.face_gradient_comps(g8, c.values), n.values)
    np.testing.assert_allclose(chemotaxis_divergence(n, c, 0.0).values, oracle, atol=1e-12)


def test_chemotaxis_flux_scales_like_inverse_eps(g8, rng):
    n = ScalarField(g8, 1.0 + rng.random(g8.shape))
    c = ScalarField(g8, rng.random(g8.shape))
    for eps in (2e3, 1e4):
        big = np.abs(chemotaxis_divergence(n, c, eps).values).max()
        half = np.abs(chemotaxis_divergence(n, c, eps / 2).values).max()
        assert half / big == pytest.approx(2.0, rel=0.05)


def test_consumption_examples(g8):
    val = consumption(ScalarField.constant(g8, 2.0), ScalarField.constant(g8, 1.0), 0.5).values
    assert np.allclose(val, 2 * np.log(2), rtol=1e-14)
    assert 0.5 <= val[0, 0] <= 2.0
    assert np.all(consumption(ScalarField.zeros(g8), ScalarField.constant(g8, 1.0), 0.5).values == 0)
    small = consumption(ScalarField.constant(g8, 3.0), ScalarField.constant(g8, 2.0), 1e-8).values
    limit = consumption(ScalarField.constant(g8, 3.0), ScalarField.constant(g8, 2.0), 0.0).values
    assert np.allclose(small, 6.0, atol=1e-6) and np.all(limit == 6.0)
    with pytest.raises(ValueError):
        consumption(ScalarField.constant(g8, -1.0), ScalarField.constant(g8, 1.0), 0.1)


def test_eps_zero_branch_is_exact():
    n = np.linspace(0, 5, 11)
    assert uptake_rate(n, 0.0) is n and sensitivity(n, 0.0) is n


@settings(max_examples=50, deadline=None)
@given(eps=hst.floats(1e-6, 1e3), lo=hst.floats(0, 50), width=hst.floats(1e-3, 50))
def test_uptake_increasing_and_concave(eps, lo, width):
    n = np.linspace(lo, lo + width, 41)
    k = uptake_rate(n, eps)
    d1 = np.diff(k)
    ulp = 8 * np.finfo(float).eps * np.abs(k).max()  # differences below rounding of k carry no sign
    assert np.all(d1 >= -ulp)
    assert np.all(np.diff(d1) <= ulp)
    assert np.all(k <= n + 1e-12 * n)
    assert np.all(k >= 0)


def test_advect_velocity_trivial_cases(g8, rng):
    u = random_solenoidal(g8, rng)
    assert all(np.all(c == 0) for c in advect_velocity(VectorField.zeros(g8), u).components)
    assert all(np.all(c == 0) for c in skew_advect(VectorField.zeros(g8), u).components)


def test_advect_velocity_constant_u_interior():
    g = make_grid(2, [8, 8], [1.0, 1.0])
    u = VectorField(g, (np.ones(g.face_shape(0)), np.zeros(g.face_shape(1))))
    w = VectorField(g, (np.full(g.face_shape(0), 0.3), np.full(g.face_shape(1), -0.2)))
    out = advect_velocity(w, u).components[0]
    # interior rows away from the anti-reflected walls see a constant field
    assert np.abs(out[1:-1, 1:-1]).max() < 1e-14


def test_advect_velocity_shear_hand_values():
    g = make_grid(2, [8, 8], [1.0, 1.0])
    h = g.spacing[1]
    y = g.face_coords(0)[1]
    u0 = y.copy()
    u0[0] = u0[-1] = 0.0
    u = VectorField(g, (u0, np.zeros(g.face_shape(1))))
    w = VectorField(g, (np.zeros(g.face_shape(0)), np.full(g.face_shape(1), 0.5)))
    out = advect_velocity(w, u).components[0]
    # w_y = 0.5 > 0 upwinds from below: 0.5 * (u[i, j] - u[i, j-1]) / h = 0.5 away from the bottom wall
    np.testing.assert_allclose(out[1:-1, 1:], 0.5, rtol=1e-13)
    np.testing.assert_allclose(out[1:-1, 0], 0.5 * (u0[1:-1, 0] + u0[1:-1, 0]) / h, rtol=1e-13)


def test_skew_advect_matches_pointwise_oracle(rng):
    g = make_grid(2, [5, 6], [1.0, 1.2])
    w, u = random_faces(g, rng), random_faces(g, rng)
    expected = oracles.skew_convection(g, w.components, u.components)
    got = skew_advect(w, u).components
    for a in range(2):
        np.testing.assert_allclose(got[a], expected[a], atol=1e-12)


def test_skew_advect_is_energy_neutral(rng):
    for g in (make_grid(2, [9, 7], [1.0, 1.3]), make_grid(3, [5, 4, 6], [1.0, 1.0, 1.5])):
        w = random_solenoidal(g, rng)
        u = random_faces(g, rng)
        form = sum(np.sum(a * b) for a, b in zip(skew_advect(w, u).components, u.components))
        scale = sum(np.sum(np.abs(a * b)) for a, b in zip(skew_advect(w, u).components, u.components))
        assert abs(form) < 1e-13 * scale


def test_buoyancy_of_constant_density_is_gradient(g8):
    f = buoyancy_force(ScalarField.constant(g8, 2.0), (0.0, -3.0))
    assert np.allclose(f.components[1][:, 1:-1], -6.0) and f.boundary_normal_max() == 0.0
