"""Finite-difference solver for chemotaxis coupled to incompressible flow.

Cells ``n`` and a consumed signal ``c`` are transported by a no-slip velocity
``u`` on a MAC grid; the fluid is driven by the buoyancy ``n grad(phi)``.
"""
__version__ = "0.1.0"

from .grid import Grid, make_grid
from .fields import ScalarField, VectorField, lp_norm, gradient_norm_lp, spacetime_lp_diff
from .poisson import EllipticSolveSpec, SolverError, solve_poisson_neumann, solve_screened
from .projection import leray_project, yosida
from .stepper import CFLError, Params, State, StepError, Trajectory, advance, integrate_run
from .initial import InitialDataSpec, make_initial_state
from .diagnostics import (
    DecayFit, DiagnosticsRecord, TestFunctionSpec, detect_threshold_time, fit_decay, record,
    weak_form_residual,
)
from .limits import ConvergenceTable, SweepSpec, eps_sweep, kappa_sweep
from .config import Config, ConfigError, load_config, parse_config

__all__ = [
    "Grid", "make_grid", "ScalarField", "VectorField", "lp_norm", "gradient_norm_lp",
    "spacetime_lp_diff", "EllipticSolveSpec", "SolverError", "solve_poisson_neumann",
    "solve_screened", "leray_project", "yosida", "CFLError", "Params", "State", "StepError",
    "Trajectory", "advance", "integrate_run", "InitialDataSpec", "make_initial_state",
    "DecayFit", "DiagnosticsRecord", "TestFunctionSpec", "detect_threshold_time", "fit_decay",
    "record", "weak_form_residual", "ConvergenceTable", "SweepSpec", "eps_sweep", "kappa_sweep",
    "Config", "ConfigError", "load_config", "parse_config",
]
