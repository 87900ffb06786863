"""Experiment drivers: single runs, convergence sweeps and long-time drift.

A run is described by one JSON document, for example::

    {"system": "rigid_body", "method": "hj", "order_k": 2, "step_h": 0.05,
     "t_final": 5.0, "outputs": {"summary_csv": "summary.csv"}}

Relative output paths are resolved against the config file's directory.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .casimir import SPLIT_ORDERS, SPLIT_SCHEMES, split_step
from .charts import CHART_NAMES, get_chart
from .errors import ConfigError
from .reference import TOL_RANGE, reference_endpoint
from .stepper import IntegratorConfig, PoissonState, TrajectoryRecord, integrate, make_record
from .systems import SYSTEM_NAMES, make_system

__all__ = [
    "ExperimentConfig",
    "RunSummary",
    "load_config",
    "parse_config",
    "run_trajectory",
    "run_single",
    "run_convergence",
    "run_drift",
    "fit_slope",
    "drift_ratio",
    "write_trajectory_csv",
    "write_summary_csv",
    "SUMMARY_COLUMNS",
]

METHODS = ("hj", "split")
SUMMARY_COLUMNS = (
    "method",
    "order_k",
    "step_h",
    "n_steps",
    "t_final",
    "global_error",
    "max_energy_deviation",
    "max_casimir_deviation",
    "energy_drift_ratio",
    "fitted_slope",
    "fit_residual",
)
_OUTPUT_KEYS = ("trajectory_csv", "summary_csv")


@dataclass(frozen=True)
class ExperimentConfig:
    system: str
    order_k: int
    step_h: float
    t_final: float
    method: str = "hj"
    chart: Optional[str] = None
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    p_degree: Optional[int] = None
    initial_state: Optional[tuple] = None
    params: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    split_scheme: str = "lie-trotter"
    split_order: str = "23"
    recenter_every_step: bool = True
    reference_tol: float = 1e-13

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(
            order_k=self.order_k,
            step_h=self.step_h,
            newton_tol=self.newton_tol,
            newton_max_iter=self.newton_max_iter,
            p_degree=self.p_degree,
            recenter_every_step=self.recenter_every_step,
        )

    def build_system(self):
        return make_system(self.system, **self.params)

    def state0(self, system) -> np.ndarray:
        x = system.default_state if self.initial_state is None else self.initial_state
        return np.asarray(x, dtype=float)


_REQUIRED = ("system", "order_k", "step_h", "t_final")
_FIELDS = tuple(ExperimentConfig.__dataclass_fields__)


def _need(cond, name, msg):
    if not cond:
        raise ConfigError(f"config field {name!r}: {msg}")


def parse_config(doc: dict, base_dir: Path | str | None = None) -> ExperimentConfig:
    """Validate a config mapping; every problem raises :class:`ConfigError` naming the field."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(doc) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(map(repr, unknown))}")
    for name in _REQUIRED:
        _need(name in doc, name, "is required")

    d = dict(doc)
    _need(d["system"] in SYSTEM_NAMES, "system", f"expected one of {', '.join(SYSTEM_NAMES)}")
    _need(d.get("method", "hj") in METHODS, "method", f"expected one of {', '.join(METHODS)}")
    chart = d.get("chart")
    _need(chart is None or chart in CHART_NAMES, "chart", f"expected one of {', '.join(CHART_NAMES)}")
    _need(isinstance(d["order_k"], int) and not isinstance(d["order_k"], bool) and d["order_k"] >= 1,
          "order_k", "must be an integer >= 1")
    for name in ("step_h", "t_final", "newton_tol", "reference_tol"):
        if name in d:
            _need(isinstance(d[name], (int, float)) and not isinstance(d[name], bool) and math.isfinite(d[name]),
                  name, "must be a finite number")
    _need(d["step_h"] > 0, "step_h", "must be positive")
    _need(d["t_final"] >= 0, "t_final", "must be non-negative")
    if "newton_tol" in d:
        _need(d["newton_tol"] > 0, "newton_tol", "must be positive")
    if "newton_max_iter" in d:
        _need(isinstance(d["newton_max_iter"], int) and d["newton_max_iter"] >= 1, "newton_max_iter",
              "must be an integer >= 1")
    if d.get("p_degree") is not None:
        _need(isinstance(d["p_degree"], int) and d["p_degree"] >= d["order_k"] + 2, "p_degree",
              "must be an integer >= order_k + 2")
    if "reference_tol" in d:
        lo, hi = TOL_RANGE
        _need(lo <= d["reference_tol"] <= hi, "reference_tol", f"must lie in [{lo:g}, {hi:g}]")
    _need(d.get("split_scheme", "lie-trotter") in SPLIT_SCHEMES, "split_scheme",
          f"expected one of {', '.join(SPLIT_SCHEMES)}")
    _need(d.get("split_order", "23") in SPLIT_ORDERS, "split_order", f"expected one of {', '.join(SPLIT_ORDERS)}")
    _need(isinstance(d.get("recenter_every_step", True), bool), "recenter_every_step", "must be a boolean")
    if d.get("method") == "split":
        _need(d["system"] in ("rigid_body", "symmetric_top"), "method", "'split' only applies to the rigid body")

    params = d.get("params", {}) or {}
    _need(isinstance(params, dict), "params", "must be an object")
    try:
        system = make_system(d["system"], **params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config field 'params': {exc}") from None
    if d.get("initial_state") is not None:
        x0 = d["initial_state"]
        _need(isinstance(x0, list) and all(isinstance(v, (int, float)) for v in x0), "initial_state",
              "must be a list of numbers")
        _need(len(x0) == system.dim, "initial_state", f"expected {system.dim} entries for {system.name}")
        d["initial_state"] = tuple(float(v) for v in x0)
    chart_name = chart or system.default_chart
    _need(get_chart(chart_name).dim_state == system.dim, "chart",
          f"{chart_name!r} does not match the dimension of {system.name}")

    outputs = d.get("outputs", {}) or {}
    _need(isinstance(outputs, dict), "outputs", "must be an object")
    bad = sorted(set(outputs) - set(_OUTPUT_KEYS))
    _need(not bad, "outputs", f"unknown key(s) {', '.join(bad)}")
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    d["outputs"] = {k: str(base / v) for k, v in outputs.items() if v}
    d["params"] = params
    d["step_h"] = float(d["step_h"])
    d["t_final"] = float(d["t_final"])
    return ExperimentConfig(**d)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    return parse_config(doc, path.parent)


# -- running ---------------------------------------------------------------------


def run_trajectory(cfg: ExperimentConfig) -> TrajectoryRecord:
    """Integrate the configured system; ``t_final = 0`` gives a one-point record."""
    system = cfg.build_system()
    x0 = cfg.state0(system)
    if int(round(cfg.t_final / cfg.step_h)) == 0:
        return make_record(system, system.name, [0.0], [x0], [0])
    chart = get_chart(cfg.chart or system.default_chart)
    step_fn = None
    if cfg.method == "split":
        I1, I2, I3 = system.params.get("inertia") or (system.params["I"], system.params["I"], system.params["I_prime"])
        h, scheme, order = cfg.step_h, cfg.split_scheme, cfg.split_order

        def step_fn(x):
            return split_step(I1, I2, I3, h, x, scheme, order), 0

    return integrate(chart, system, cfg.integrator(), PoissonState(system.name, x0), cfg.t_final, step_fn=step_fn)


def drift_ratio(energy) -> float:
    """Max ``|H - H0|`` over the second half of a run divided by that over the first half."""
    e = np.asarray(energy, dtype=float)
    if len(e) < 3:
        return 1.0
    dev = np.abs(e - e[0])
    mid = len(e) // 2
    first, second = float(dev[:mid].max()), float(dev[mid:].max())
    if first == 0.0:
        return 1.0 if second == 0.0 else math.inf
    return second / first


def fit_slope(hs: Sequence[float], errors: Sequence[float]):
    """Least-squares slope of ``log10(error)`` against ``log10(h)``.

    Returns ``(slope, residual)`` with the residual the RMS deviation from
    the fitted line, in decades.
    """
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(hs) < 2 or len(hs) != len(errors):
        raise ValueError("need at least two (h, error) points to fit a slope")
    if not (np.all(np.isfinite(errors)) and np.all(errors > 0) and np.all(hs > 0)):
        raise ValueError("steps and errors must be positive and finite")
    x, y = np.log10(hs), np.log10(errors)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    return float(slope), float(np.sqrt(np.mean(resid**2)))


@dataclass
class RunSummary:
    method: str
    order_k: int
    step_h: float
    n_steps: int
    t_final: float
    global_error: float
    max_energy_deviation: float
    max_casimir_deviation: float
    energy_drift_ratio: float
    fitted_slope: float = math.nan
    fit_residual: float = math.nan

    def row(self):
        return [getattr(self, c) for c in SUMMARY_COLUMNS]


def summarize(cfg: ExperimentConfig, rec: TrajectoryRecord, with_error: bool = True) -> RunSummary:
    system = cfg.build_system()
    n = len(rec) - 1
    t_end = float(rec.times[-1])
    err = 0.0
    if with_error and n > 0:
        ref = reference_endpoint(system, rec.coords[0], t_end, cfg.reference_tol)
        err = float(np.linalg.norm(rec.coords[-1] - ref))
    cas_dev = float(np.max(np.abs(rec.casimirs - rec.casimirs[0]))) if rec.casimirs.size else 0.0
    return RunSummary(
        method=cfg.method if cfg.method == "hj" else f"split-{cfg.split_scheme}-{cfg.split_order}",
        order_k=cfg.order_k,
        step_h=cfg.step_h,
        n_steps=n,
        t_final=t_end,
        global_error=err,
        max_energy_deviation=float(np.max(np.abs(rec.energy - rec.energy[0]))),
        max_casimir_deviation=cas_dev,
        energy_drift_ratio=drift_ratio(rec.energy),
    )


def run_single(cfg: ExperimentConfig, with_error: bool = True) -> RunSummary:
    """Integrate, write the configured CSV outputs, and return the summary."""
    rec = run_trajectory(cfg)
    summary = summarize(cfg, rec, with_error)
    if "trajectory_csv" in cfg.outputs:
        write_trajectory_csv(cfg.outputs["trajectory_csv"], rec)
    if "summary_csv" in cfg.outputs:
        write_summary_csv(cfg.outputs["summary_csv"], [summary])
    return summary


def _summary_only(cfg):
    return summarize(cfg, run_trajectory(cfg))


def run_convergence(cfg: ExperimentConfig, orders: Sequence[int], hs: Sequence[float], jobs: int = 1):
    """Global error at ``t_final`` for every ``(K, h)``, plus one fitted slope per ``K``.

    Rows come back in ``(K, h)`` order regardless of ``jobs``.
    """
    grid = [replace(cfg, order_k=int(k), step_h=float(h), outputs={}) for k in orders for h in hs]
    for g in grid:
        if g.p_degree is not None and g.p_degree < g.order_k + 2:
            raise ConfigError(f"config field 'p_degree': must be >= order_k + 2 for K = {g.order_k}")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_summary_only, grid))
    else:
        rows = [_summary_only(g) for g in grid]
    for k in orders:
        sub = [r for r in rows if r.order_k == k]
        pts = [(r.step_h, r.global_error) for r in sub if r.global_error > 0]
        if len(pts) >= 2:
            slope, res = fit_slope(*zip(*pts))
            for r in sub:
                r.fitted_slope, r.fit_residual = slope, res
    if "summary_csv" in cfg.outputs:
        write_summary_csv(cfg.outputs["summary_csv"], rows)
    return rows


def run_drift(cfg: ExperimentConfig, t_final: Optional[float] = None) -> RunSummary:
    """Long run for energy and Casimir drift; the global error is not computed."""
    if t_final is not None:
        cfg = replace(cfg, t_final=float(t_final))
    return run_single(cfg, with_error=False)


# -- CSV -------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write_rows(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def write_trajectory_csv(path, rec: TrajectoryRecord):
    coords = rec.coords
    d = coords.shape[1]
    nc = rec.casimirs.shape[1]
    header = ["step", "t"] + [f"coord_{i}" for i in range(d)] + ["energy"] + [f"casimir_{i}" for i in range(nc)]
    header.append("newton_iters")
    rows = (
        [n, rec.times[n], *coords[n], rec.energy[n], *rec.casimirs[n], int(rec.newton_iters[n])]
        for n in range(len(rec))
    )
    _write_rows(path, header, rows)


def write_summary_csv(path, summaries):
    _write_rows(path, list(SUMMARY_COLUMNS), (s.row() for s in summaries))
