"""Truncated solutions of the groupoid Hamilton-Jacobi equation.

The generating function is carried as a single jet in ``(t, u_1..u_m)``
expanded at a center ``u_bar``.  Starting from the chart's base generating
function, the recursion fills one time slice per level::

    S_{k+1} = -[t^k] H(t, tgt(u, grad_u S)) / (k + 1)

which makes the residual ``dS/dt + H(t, tgt(u, grad_u S))`` vanish through
``t^(K-1)`` after ``K`` levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .charts import GroupoidChart
from .jets import Jet, jet_eval, jet_substitute, jet_variable, monomials

__all__ = ["GeneratingSeries", "SeriesAtTime", "generate_series", "hj_residual"]


@dataclass(frozen=True)
class GeneratingSeries:
    chart_name: str
    order_k: int
    p_degree: int
    center: np.ndarray
    series: Jet

    @property
    def dim_u(self) -> int:
        return self.series.num_vars - 1

    def time_slice(self, k: int) -> Jet:
        """The ``t^k`` part of the series (still a jet in all variables)."""
        return self.series.slice_power(0, k)

    def slice_norm(self, k: int) -> float:
        return float(np.linalg.norm(self.time_slice(k).coeffs))

    def truncate_order(self, order_k: int) -> "GeneratingSeries":
        """Drop time slices above ``t^order_k``."""
        s = self.series
        kept = sum((s.slice_power(0, k) for k in range(1, order_k + 1)), s.slice_power(0, 0))
        return GeneratingSeries(self.chart_name, order_k, self.p_degree, self.center, kept)

    def at_time(self, h: float) -> "SeriesAtTime":
        return SeriesAtTime(jet_substitute(self.series, 0, h), self.center)

    def __call__(self, t, u_offset):
        return jet_eval(self.series, np.concatenate([[t], u_offset]))


class SeriesAtTime:
    """``S(h, center + delta)`` as a polynomial in ``delta``, with fast gradient and Hessian."""

    def __init__(self, poly: Jet, center):
        self.poly = poly
        self.center = np.asarray(center, dtype=float)
        m, cap = poly.num_vars, poly.degree_cap
        self._exps = monomials(m, cap)
        self._rows = np.arange(m)[None, :]
        grads = [poly.partial(i) for i in range(m)]
        self._grad = np.array([g.coeffs for g in grads])
        self._hess = np.array([[g.partial(j).coeffs for j in range(m)] for g in grads])

    def _mono(self, delta):
        delta = np.asarray(delta, dtype=float)
        powers = delta[:, None] ** np.arange(self.poly.degree_cap + 1)[None, :]
        return np.prod(powers[self._rows, self._exps], axis=1)

    def value(self, delta) -> float:
        return float(self._mono(delta) @ self.poly.coeffs)

    def gradient(self, delta) -> np.ndarray:
        return self._grad @ self._mono(delta)

    def gradient_hessian(self, delta):
        mono = self._mono(delta)
        return self._grad @ mono, self._hess @ mono


def generate_series(
    chart: GroupoidChart,
    system,
    order_k: int,
    center: Sequence[float],
    p_degree: int | None = None,
) -> GeneratingSeries:
    """Solve the Hamilton-Jacobi recursion to time order ``order_k`` around ``center``.

    ``system.hamiltonian(coords, t)`` is evaluated on jets, composed with the
    chart's target map.  The total-degree cap defaults to ``order_k + 2``.
    """
    if order_k < 1:
        raise ValueError("order_k must be >= 1")
    if p_degree is None:
        p_degree = order_k + 2
    if p_degree < order_k + 2:
        raise ValueError(f"p_degree={p_degree} must be >= order_k + 2 = {order_k + 2}")
    center = np.array(center, dtype=float)
    m = chart.dim_u
    if center.shape != (m,):
        raise ValueError(f"center must have {m} entries")
    nv = m + 1
    t = jet_variable(0, 0.0, nv, p_degree)
    u = [jet_variable(i + 1, center[i], nv, p_degree) for i in range(m)]
    S = chart.s0(u)
    for k in range(order_k):
        w = [S.partial(i + 1) for i in range(m)]
        h_hat = system.hamiltonian(chart.tgt_map(u, w), t)
        S = S + h_hat.slice_power(0, k) * t * (-1.0 / (k + 1))
    return GeneratingSeries(chart.name, order_k, p_degree, center, S)


def hj_residual(series: GeneratingSeries, chart: GroupoidChart, system, t: float, u_offset) -> float:
    """``dS/dt + H(t, tgt(u, grad_u S))`` at ``(t, center + u_offset)``."""
    u_offset = np.asarray(u_offset, dtype=float)
    point = np.concatenate([[t], u_offset])
    S = series.series
    dS_dt = jet_eval(S.partial(0), point)
    w = [jet_eval(S.partial(i + 1), point) for i in range(series.dim_u)]
    u = series.center + u_offset
    return float(dS_dt + system.hamiltonian(chart.tgt_map(list(u), w), t))
