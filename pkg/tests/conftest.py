import sys
from pathlib import Path

from hypothesis import settings
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from chemostokes import EllipticSolveSpec, ScalarField, State, VectorField, leray_project, make_grid  # noqa: E402
from chemostokes._stencils import sl  # noqa: E402

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

TIGHT = EllipticSolveSpec(tol=1e-12, max_iter=1000)


def random_faces(grid, rng, scale=1.0):
    """Random MAC velocity with zero normal components on the walls."""
    comps = []
    for a in range(grid.dim):
        ua = scale * rng.standard_normal(grid.face_shape(a))
        ua[sl(grid.dim, a, 0)] = 0.0
        ua[sl(grid.dim, a, -1)] = 0.0
        comps.append(ua)
    return VectorField(grid, tuple(comps))


def random_solenoidal(grid, rng, scale=1.0):
    return leray_project(random_faces(grid, rng, scale), TIGHT).u_sol


def bump_state(grid, rng=None, u_scale=0.0):
    x = grid.cell_coords()
    r2 = sum((xi - 0.35 * L) ** 2 for xi, L in zip(x, grid.lengths))
    n = 1.0 + 2.0 * np.exp(-r2 / (0.1 * grid.lengths[0]) ** 2)
    c = 0.5 + 0.4 * np.exp(-sum((xi - 0.6 * L) ** 2 for xi, L in zip(x, grid.lengths)) / 0.1)
    u = random_solenoidal(grid, rng, u_scale) if rng is not None and u_scale else VectorField.zeros(grid)
    return State(ScalarField(grid, n), ScalarField(grid, c), u, ScalarField.zeros(grid), 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def g8():
    return make_grid(2, [8, 8], [1.0, 1.0])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(".")[0].split()[-1])):
            terminalreporter.write_line(line)
