"""One-step Poisson maps from truncated generating functions.

A step solves ``input_side(u, grad S(h, u)) = state`` for ``u`` by Newton's
method and returns ``output_side(u, grad S(h, u))``.  Because any polynomial
``S`` generates a Lagrangian submanifold, the step is a Poisson map up to the
Newton tolerance, whatever the truncation order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .charts import GroupoidChart
from .errors import IntegrationError, NewtonConvergenceError, SingularDivisionError, SingularJacobianError
from .hj import GeneratingSeries, SeriesAtTime, generate_series
from .jets import Jet, jet_variable

__all__ = [
    "PoissonState",
    "IntegratorConfig",
    "TrajectoryRecord",
    "StepResult",
    "step",
    "step_detail",
    "integrate",
    "induced_map",
    "fixed_point_check",
]

log = logging.getLogger(__name__)

MAX_CONDITION = 1e12
MAX_HALVINGS = 5


@dataclass(frozen=True)
class PoissonState:
    system_name: str
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise ValueError(f"state coordinates must be a finite vector, got {self.coords!r}")
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)


@dataclass(frozen=True)
class IntegratorConfig:
    order_k: int
    step_h: float
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    p_degree: Optional[int] = None
    recenter_every_step: bool = True
    adjoint: bool = False

    def __post_init__(self):
        if self.order_k < 1:
            raise ValueError("order_k must be >= 1")
        if not self.step_h > 0:
            raise ValueError("step_h must be positive")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be >= 1")
        if self.p_degree is not None and self.p_degree < self.order_k + 2:
            raise ValueError("p_degree must be >= order_k + 2")

    @property
    def degree(self) -> int:
        return self.order_k + 2 if self.p_degree is None else self.p_degree


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    states: list
    energy: np.ndarray
    casimirs: np.ndarray
    newton_iters: np.ndarray

    def __post_init__(self):
        n = len(self.times)
        if not (len(self.states) == len(self.energy) == len(self.casimirs) == len(self.newton_iters) == n):
            raise ValueError("trajectory fields must share one length")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    @property
    def coords(self) -> np.ndarray:
        return np.array([s.coords for s in self.states])

    @property
    def final(self) -> PoissonState:
        return self.states[-1]

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True)
class StepResult:
    coords: np.ndarray
    u: np.ndarray
    w: np.ndarray
    newton_iters: int
    residual: float


def _sides(chart: GroupoidChart, adjoint: bool):
    if chart.reverse != adjoint:
        return chart.tgt_map, chart.src_map
    return chart.src_map, chart.tgt_map


def _newton(input_map, ev: SeriesAtTime, target, u0, tol, max_iter):
    m = len(u0)
    scale = max(1.0, float(np.max(np.abs(target))))
    tol = tol * scale

    def evaluate(u, with_jac):
        delta = u - ev.center
        if not with_jac:
            g = ev.gradient(delta)
            return np.array(input_map(list(u), list(g)), dtype=float) - target, None, g
        g, hess = ev.gradient_hessian(delta)
        uj = [jet_variable(i, u[i], m, 1) for i in range(m)]
        wj = [Jet._wrap(uj[0]._layout, np.concatenate([[g[i]], hess[i]])) for i in range(m)]
        out = input_map(uj, wj)
        F = np.array([o.value for o in out]) - target
        J = np.array([o.gradient for o in out])
        return F, J, g

    u = np.array(u0, dtype=float)
    F, J, g = evaluate(u, True)
    r = float(np.max(np.abs(F)))
    for it in range(max_iter + 1):
        if r <= tol:
            u, g, r = _polish(evaluate, u, F, J, g, r)
            return u, g, it, r
        if it == max_iter:
            break
        if np.linalg.cond(J) > MAX_CONDITION:
            raise SingularJacobianError(f"Newton Jacobian condition number exceeds {MAX_CONDITION:.0e}")
        du = np.linalg.solve(J, -F)
        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = u + lam * du
            F_t, J_t, g_t = evaluate(trial, True)
            r_t = float(np.max(np.abs(F_t)))
            if r_t < r or r_t <= tol:
                break
            lam *= 0.5
        else:
            if r_t > r:
                raise NewtonConvergenceError(f"Newton residual stalled at {r:.3e} (tol {tol:.1e})")
        u, F, J, g, r = trial, F_t, J_t, g_t, r_t
    raise NewtonConvergenceError(f"Newton did not converge in {max_iter} iterations: residual {r:.3e}")


def _polish(evaluate, u, F, J, g, r):
    # One extra Newton correction once the tolerance is met.  Quadratic
    # convergence takes the residual to roundoff, which keeps Casimir errors
    # from accumulating over long runs.
    if r == 0.0:
        return u, g, r
    try:
        trial = u + np.linalg.solve(J, -F)
    except np.linalg.LinAlgError:
        return u, g, r
    F_t, _, g_t = evaluate(trial, False)
    r_t = float(np.max(np.abs(F_t)))
    if r_t <= r:
        return trial, g_t, r_t
    return u, g, r


SeriesFactory = Callable[[np.ndarray], GeneratingSeries]


def _default_factory(chart, system, cfg) -> SeriesFactory:
    def factory(center):
        return generate_series(chart, system, cfg.order_k, center, cfg.degree)

    return factory


def induced_map(
    chart: GroupoidChart,
    series: GeneratingSeries,
    h: float,
    coords,
    *,
    u0=None,
    newton_tol=1e-12,
    newton_max_iter=50,
    adjoint=False,
) -> StepResult:
    """The transformation generated by ``S(h, .)``, without base-map correction."""
    coords = np.asarray(coords, dtype=float)
    input_map, output_map = _sides(chart, adjoint)
    ev = series.at_time(h)
    if u0 is None:
        u0 = _center(chart, coords, adjoint)
    u, g, iters, r = _newton(input_map, ev, coords, u0, newton_tol, newton_max_iter)
    out = np.array(output_map(list(u), list(g)), dtype=float)
    return StepResult(out, u, g, iters, r)


def _center(chart, coords, adjoint):
    if not adjoint:
        return np.asarray(chart.center_rule(coords), dtype=float)
    # Adjoint orientation: the base bisection is matched on the other side.
    return np.asarray(chart.center_rule(chart.apply_base_inverse(coords)), dtype=float)


def _undo_base(chart, coords, adjoint):
    # The induced map is base o flow, so the forward step strips the base on
    # the output and the adjoint (inverse) map applies it on the input.
    if chart.base_map is None or adjoint:
        return coords
    return chart.apply_base_inverse(coords)


def _step_input(chart, coords, adjoint):
    if chart.base_map is None or not adjoint:
        return coords
    return chart.apply_base(coords)


def step_detail(
    chart: GroupoidChart,
    system,
    cfg: IntegratorConfig,
    state: PoissonState,
    series: Optional[GeneratingSeries] = None,
    series_factory: Optional[SeriesFactory] = None,
) -> StepResult:
    """One step, returning the Newton diagnostics as well.

    ``series`` (a fixed, pre-generated series) takes precedence over
    ``series_factory`` (called with the center for this step); by default a
    fresh series of the configured order is generated at the chart's center.
    Charts whose base bisection is not the identity have the inverse base map
    applied to the output, so the step is a near-identity map.
    """
    coords = np.asarray(state.coords, dtype=float)
    if len(coords) != chart.dim_state:
        raise ValueError(f"state has {len(coords)} coordinates, chart {chart.name} expects {chart.dim_state}")
    target = _step_input(chart, coords, cfg.adjoint)
    center = _center(chart, target, cfg.adjoint)
    if series is None:
        factory = series_factory or _default_factory(chart, system, cfg)
        series = factory(center)
    res = induced_map(
        chart,
        series,
        cfg.step_h,
        target,
        u0=center,
        newton_tol=cfg.newton_tol,
        newton_max_iter=cfg.newton_max_iter,
        adjoint=cfg.adjoint,
    )
    out = _undo_base(chart, res.coords, cfg.adjoint)
    return StepResult(out, res.u, res.w, res.newton_iters, res.residual)


def step(chart, system, cfg, state, series=None, series_factory=None) -> PoissonState:
    """Advance ``state`` by one step of size ``cfg.step_h``."""
    res = step_detail(chart, system, cfg, state, series=series, series_factory=series_factory)
    return PoissonState(state.system_name, res.coords)


def integrate(
    chart: GroupoidChart,
    system,
    cfg: IntegratorConfig,
    state0: PoissonState,
    T_final: float,
    series_factory: Optional[SeriesFactory] = None,
    step_fn: Optional[Callable] = None,
) -> TrajectoryRecord:
    """Iterate :func:`step` for ``round(T_final / h)`` steps.

    With ``cfg.recenter_every_step`` off, one series is generated at the
    initial center and reused.  ``step_fn(coords) -> (coords, iters)``
    replaces the Hamilton-Jacobi step entirely (used by explicit splitting
    methods so they share the bookkeeping).
    """
    if not T_final > 0:
        raise ValueError("T_final must be positive")
    h = cfg.step_h
    n_steps = int(round(T_final / h))
    if n_steps < 1:
        raise ValueError(f"T_final={T_final} is shorter than one step of {h}")
    fixed = None
    if step_fn is None and not cfg.recenter_every_step:
        center = _center(chart, _step_input(chart, state0.coords, cfg.adjoint), cfg.adjoint)
        fixed = (series_factory or _default_factory(chart, system, cfg))(center)

    coords = np.array(state0.coords, dtype=float)
    traj = [coords]
    iters = [0]
    for n in range(n_steps):
        try:
            if step_fn is not None:
                coords, it = step_fn(coords)
            else:
                res = step_detail(
                    chart,
                    system,
                    cfg,
                    PoissonState(state0.system_name, coords),
                    series=fixed,
                    series_factory=series_factory,
                )
                coords, it = res.coords, res.newton_iters
        except (NewtonConvergenceError, SingularJacobianError, SingularDivisionError, ValueError) as exc:
            raise IntegrationError(n, exc) from exc
        traj.append(np.asarray(coords, dtype=float))
        iters.append(it)
    return make_record(system, state0.system_name, h * np.arange(n_steps + 1), traj, iters)


def make_record(system, name, times, coords_list, iters) -> TrajectoryRecord:
    states = [PoissonState(name, c) for c in coords_list]
    energy = np.array([system.energy(c) for c in coords_list])
    if system.casimirs:
        cas = np.array([system.casimir_values(c) for c in coords_list])
    else:
        cas = np.zeros((len(coords_list), 0))
    return TrajectoryRecord(np.asarray(times, dtype=float), states, energy, cas, np.asarray(iters, dtype=int))


def fixed_point_check(
    chart: GroupoidChart,
    series: GeneratingSeries,
    h: float,
    u_candidate,
    grad_tol: float = 1e-10,
    fixed_tol: float = 1e-8,
) -> bool:
    """Check that a critical point of ``S(h, .)`` is a fixed point of the induced step.

    Returns True when the premise fails (``u_candidate`` is not critical for
    the non-base part of ``S``) or when the step leaves the induced state in
    place.  Gradients are compared against the base generating function, so
    charts with a non-zero ``s0`` are handled the same way as Lie groups.
    """
    from .charts import s0_gradient

    u = np.asarray(u_candidate, dtype=float)
    ev = series.at_time(h)
    w = ev.gradient(u - ev.center)
    if np.linalg.norm(w - s0_gradient(chart.s0, u)) > grad_tol:
        return True
    input_map, output_map = _sides(chart, False)
    state = np.array(input_map(list(u), list(w)), dtype=float)
    out = _undo_base(chart, np.array(output_map(list(u), list(w)), dtype=float), False)
    return bool(np.linalg.norm(out - state) <= fixed_tol)
