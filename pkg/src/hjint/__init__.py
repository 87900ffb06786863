"""Poisson integrators from truncated Hamilton-Jacobi generating functions.

The state lives on the dual of a Lie algebroid (``so(3)*`` for the rigid
body, ``S^2 x so(3)*`` for the heavy top, and so on).  Each step solves one
implicit equation built from a polynomial generating function on a chart of
the cotangent groupoid, so Casimirs are conserved to solver tolerance at
every truncation order.
"""

from .casimir import apply_casimir_modification, split_step, symmetric_top_exact_series
from .charts import CHART_NAMES, GroupoidChart, get_chart
from .errors import (
    ChartSelfTestError,
    ConfigError,
    IntegrationError,
    NewtonConvergenceError,
    ReferenceSolverError,
    SingularDivisionError,
    SingularJacobianError,
)
from .hj import GeneratingSeries, generate_series, hj_residual
from .jets import Jet, jet_constant, jet_variable
from .reference import reference_solve
from .stepper import IntegratorConfig, PoissonState, TrajectoryRecord, integrate, step
from .systems import SYSTEM_NAMES, HamiltonianSystem, make_system

__version__ = "0.1.0"

__all__ = [
    "Jet",
    "jet_constant",
    "jet_variable",
    "GroupoidChart",
    "get_chart",
    "CHART_NAMES",
    "GeneratingSeries",
    "generate_series",
    "hj_residual",
    "PoissonState",
    "IntegratorConfig",
    "TrajectoryRecord",
    "step",
    "integrate",
    "HamiltonianSystem",
    "make_system",
    "SYSTEM_NAMES",
    "reference_solve",
    "apply_casimir_modification",
    "split_step",
    "symmetric_top_exact_series",
    "SingularDivisionError",
    "NewtonConvergenceError",
    "SingularJacobianError",
    "ChartSelfTestError",
    "ConfigError",
    "IntegrationError",
    "ReferenceSolverError",
]
