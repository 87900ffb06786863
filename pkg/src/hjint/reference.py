"""High-accuracy reference trajectories.

Thin wrapper over scipy's adaptive 8(5,3) Dormand-Prince pair (``DOP853``)
with dense output, used as ground truth for global-error measurements.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ReferenceSolverError
from .stepper import TrajectoryRecord, make_record

__all__ = ["reference_solve", "reference_endpoint", "TOL_RANGE"]

TOL_RANGE = (1e-14, 1e-6)
# DOP853 refuses relative tolerances below ~100 machine epsilons.
_RTOL_FLOOR = 100 * np.finfo(float).eps


def _solve(system, state0, T, tol, t_eval=None):
    lo, hi = TOL_RANGE
    if not lo <= tol <= hi:
        raise ValueError(f"tol={tol:g} outside [{lo:g}, {hi:g}]")
    if T < 0:
        raise ValueError("T must be non-negative")
    x0 = np.asarray(state0, dtype=float)
    if T == 0:
        return np.array([0.0]), x0[None, :]
    sol = solve_ivp(
        lambda t, x: system.rhs(x, t),
        (0.0, float(T)),
        x0,
        method="DOP853",
        rtol=max(tol, _RTOL_FLOOR),
        atol=tol,
        t_eval=t_eval,
        dense_output=t_eval is None,
    )
    if sol.status != 0:
        raise ReferenceSolverError(f"reference solver failed before t={T:.6g}: {sol.message}")
    return sol.t, sol.y.T


def reference_solve(system, state0, T: float, tol: float = 1e-12, times=None) -> TrajectoryRecord:
    """Integrate ``system.reference_rhs`` from ``state0`` to ``T``.

    ``times`` selects the output grid (defaults to the solver's own steps).
    """
    t_eval = None if times is None else np.asarray(times, dtype=float)
    if t_eval is not None and T > 0 and (t_eval[0] < 0 or t_eval[-1] > T):
        raise ValueError("output times must lie in [0, T]")
    t, y = _solve(system, state0, T, tol, t_eval)
    n = len(t)
    return make_record(system, system.name, t, list(y), np.zeros(n, dtype=int))


def reference_endpoint(system, state0, T: float, tol: float = 1e-12) -> np.ndarray:
    """State at time ``T`` only."""
    _, y = _solve(system, state0, T, tol, None if T == 0 else np.array([float(T)]))
    return y[-1].copy()
