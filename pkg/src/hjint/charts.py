"""Coordinate charts on cotangent groupoids.

A chart describes a neighbourhood of the identity bisection of a cotangent
groupoid ``T*G => A*G`` by a generating function ``S(u)``: the point of
``T*G`` attached to ``u`` is obtained from ``u`` and ``w = grad S(u)``, and the
source/target maps are written directly as functions of ``(u, w)``.  The
sign flips needed to make ``graph(dS)`` a Lagrangian submanifold are folded
into those functions.

All maps are written with plain arithmetic plus :mod:`hjint.jets` elementary
functions, so they can be evaluated on floats, numpy arrays or jets.

The raw printed source/target formulas (``cayley_alpha`` and friends) are
exposed separately, in the coordinates of ``T*G`` itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import jets
from .errors import ChartSelfTestError, SingularDivisionError
from .jets import Jet

__all__ = [
    "GroupoidChart",
    "chart_pair",
    "chart_so3_cayley",
    "chart_heavy_top",
    "chart_elroy_beanie",
    "chart_so3_euler",
    "chart_trian2",
    "get_chart",
    "CHART_NAMES",
    "s0_gradient",
    "cayley_alpha",
    "cayley_beta",
    "cayley_rotation",
    "heavy_top_alpha",
    "heavy_top_beta",
    "elroy_alpha",
    "elroy_beta",
    "euler_alpha",
    "euler_beta",
    "trian2_alpha",
    "trian2_beta",
]

IDENTITY_TOL = 1e-10
# Euler angles closer than this to a pole (sin(theta) ~ 0) are rejected.
EULER_POLE_TOL = 1e-8


def _value(x):
    return x.value if isinstance(x, Jet) else x


def _cross(a, b):
    return [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]


# -- printed source/target maps -------------------------------------------------


def cayley_alpha(x, p):
    """Source map of ``T*SO(3)`` in Cayley coordinates ``x = (x, y, z)``."""
    x1, x2, x3 = x
    p1, p2, p3 = p
    return [
        (x1 * x1 / 4 + 1) * p1 + (x1 * x2 / 4 + x3 / 2) * p2 + (x1 * x3 / 4 - x2 / 2) * p3,
        (x1 * x2 / 4 - x3 / 2) * p1 + (x2 * x2 / 4 + 1) * p2 + (x2 * x3 / 4 + x1 / 2) * p3,
        (x1 * x3 / 4 + x2 / 2) * p1 + (x2 * x3 / 4 - x1 / 2) * p2 + (x3 * x3 / 4 + 1) * p3,
    ]


def cayley_beta(x, p):
    """Target map of ``T*SO(3)`` in Cayley coordinates."""
    x1, x2, x3 = x
    p1, p2, p3 = p
    return [
        (x1 * x1 / 4 + 1) * p1 + (x1 * x2 / 4 - x3 / 2) * p2 + (x1 * x3 / 4 + x2 / 2) * p3,
        (x1 * x2 / 4 + x3 / 2) * p1 + (x2 * x2 / 4 + 1) * p2 + (x2 * x3 / 4 - x1 / 2) * p3,
        (x1 * x3 / 4 - x2 / 2) * p1 + (x2 * x3 / 4 + x1 / 2) * p2 + (x3 * x3 / 4 + 1) * p3,
    ]


def cayley_rotation(x, a):
    """The rational rotation acting on the base point in the heavy-top target map."""
    x1, x2, x3 = x
    a1, a2, a3 = a
    inv = 1 / (x1 * x1 + x2 * x2 + x3 * x3 + 4)
    return [
        ((x1 * x1 - x2 * x2 - x3 * x3 + 4) * a1 + (2 * x2 * x1 + 4 * x3) * a2 + (2 * x3 * x1 - 4 * x2) * a3) * inv,
        ((2 * x2 * x1 - 4 * x3) * a1 + (-x1 * x1 + x2 * x2 - x3 * x3 + 4) * a2 + (2 * x3 * x2 + 4 * x1) * a3) * inv,
        ((2 * x3 * x1 + 4 * x2) * a1 + (2 * x3 * x2 - 4 * x1) * a2 + (-x1 * x1 - x2 * x2 + x3 * x3 + 4) * a3) * inv,
    ]


def heavy_top_alpha(a, x, p_a, p):
    """Source map on ``T*(S^2 x SO(3))``: returns ``(Gamma, Pi)``."""
    return list(a) + [b + c for b, c in zip(cayley_beta(x, p), _cross(a, p_a))]


def heavy_top_beta(a, x, p_a, p):
    """Target map on ``T*(S^2 x SO(3))``: returns ``(Gamma, Pi)``."""
    return cayley_rotation(x, a) + cayley_alpha(x, p)


def elroy_alpha(psi1, p_psi1, psi2, p_psi2, z, P):
    """Source map on ``T*S^1 x T*S^1 x T*SE(2)``, state ``(psi, p_psi, p1, p2, p3)``."""
    z1, z2, _ = z
    P1, P2, P3 = P
    return [psi1, -p_psi1, P1, P2, P3 - P1 * z2 + P2 * z1]


def elroy_beta(psi1, p_psi1, psi2, p_psi2, z, P):
    """Target map on ``T*S^1 x T*S^1 x T*SE(2)``."""
    theta = z[2]
    P1, P2, P3 = P
    c, s = jets.cos(theta), jets.sin(theta)
    return [psi2, p_psi2, P1 * c + P2 * s, -P1 * s + P2 * c, P3]


def _sin_theta(theta):
    s = jets.sin(theta)
    if abs(_value(s)) < EULER_POLE_TOL:
        raise SingularDivisionError(f"Euler chart evaluated at a pole (sin(theta) = {_value(s):.3e})")
    return s


def euler_alpha(angles, p):
    """Source map in Euler-angle coordinates ``(phi, psi, theta)``."""
    phi, _, theta = angles
    p_phi, p_psi, p_theta = p
    s = _sin_theta(theta)
    c = jets.cos(theta)
    sp, cp = jets.sin(phi), jets.cos(phi)
    return [
        ((p_psi - c * p_phi) * sp + cp * s * p_theta) / s,
        ((c * p_phi - p_psi) * cp + s * sp * p_theta) / s,
        p_phi,
    ]


def euler_beta(angles, p):
    """Target map in Euler-angle coordinates ``(phi, psi, theta)``."""
    _, psi, theta = angles
    p_phi, p_psi, p_theta = p
    s = _sin_theta(theta)
    c = jets.cos(theta)
    ss, cs = jets.sin(psi), jets.cos(psi)
    return [
        ((p_phi - p_psi * c) * ss + p_theta * s * cs) / s,
        ((p_phi - p_psi * c) * cs - p_theta * s * ss) / s,
        p_psi,
    ]


def trian2_alpha(g, p):
    g1, g2, g3 = g
    p1, p2, p3 = p
    return [p1 * g1 + p2 * g2, p2 * g3, p3 * g3]


def trian2_beta(g, p):
    g1, g2, g3 = g
    p1, p2, p3 = p
    return [p1 * g1, p2 * g1, p2 * g2 + p3 * g3]


# -- the chart record ---------------------------------------------------------------


def s0_gradient(s0: Callable, u: Sequence[float]) -> np.ndarray:
    """Gradient of a generating function at ``u`` (exact, via first-order jets)."""
    m = len(u)
    return s0([jets.jet_variable(i, float(u[i]), m, 1) for i in range(m)]).gradient


@dataclass(frozen=True)
class GroupoidChart:
    """Generating-function chart on a cotangent groupoid.

    ``src_map(u, w)`` and ``tgt_map(u, w)`` give the source and target of the
    point of ``T*G`` attached to generating variables ``u`` with
    ``w = grad S(u)``.  ``s0`` generates the chart's base bisection and
    ``base_map`` is the map of ``A*G`` it induces (``None`` for the identity).

    ``reverse`` selects the orientation of the induced map: by default the
    input state is matched on the source side and the target side is
    emitted; reversed charts match the target and emit the source.
    ``center_rule`` returns the generating variables that reproduce a given
    input state on the base bisection.
    """

    name: str
    dim_state: int
    dim_u: int
    src_map: Callable
    tgt_map: Callable
    s0: Callable
    center_rule: Callable
    validity_note: str
    validity_box: tuple
    base_map: Optional[Callable] = None
    base_inverse: Optional[Callable] = None
    reverse: bool = False
    self_test: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if self.dim_u != self.dim_state:
            raise ChartSelfTestError(f"{self.name}: dim_u={self.dim_u} != dim_state={self.dim_state}")
        if self.self_test:
            self.identity_self_test()

    @property
    def input_map(self):
        return self.tgt_map if self.reverse else self.src_map

    @property
    def output_map(self):
        return self.src_map if self.reverse else self.tgt_map

    def apply_base(self, coords):
        return np.asarray(coords, dtype=float) if self.base_map is None else np.asarray(self.base_map(coords), dtype=float)

    def apply_base_inverse(self, coords):
        if self.base_inverse is None:
            return np.asarray(coords, dtype=float)
        return np.asarray(self.base_inverse(coords), dtype=float)

    def sample_states(self, n, rng):
        lo = np.array([b[0] for b in self.validity_box])
        hi = np.array([b[1] for b in self.validity_box])
        return lo + (hi - lo) * rng.random((n, self.dim_state))

    def identity_residual(self, coords) -> float:
        """Max deviation from the base-bisection property at one state."""
        coords = np.asarray(coords, dtype=float)
        u = np.asarray(self.center_rule(coords), dtype=float)
        w = s0_gradient(self.s0, u)
        inp = np.array(self.input_map(u, w), dtype=float)
        out = np.array(self.output_map(u, w), dtype=float)
        return max(np.max(np.abs(inp - coords)), np.max(np.abs(out - self.apply_base(coords))))

    def identity_self_test(self, n=100, seed=0, tol=IDENTITY_TOL):
        rng = np.random.default_rng(seed)
        for coords in self.sample_states(n, rng):
            err = self.identity_residual(coords)
            if not err <= tol:
                raise ChartSelfTestError(
                    f"chart {self.name!r} fails the identity self-test at {coords}: residual {err:.3e}"
                )


# -- concrete charts ------------------------------------------------------------------


def chart_pair(dim_q: int = 1) -> GroupoidChart:
    """Pair groupoid ``Q x Q`` with type-II generating variables ``u = (y, q)``.

    State coordinates are ``(q, p)``.
    """
    if dim_q < 1:
        raise ValueError("dim_q must be >= 1")
    n = dim_q

    def src(u, w):
        return list(w[:n]) + list(u[:n])

    def tgt(u, w):
        return list(u[n:]) + list(w[n:])

    def s0(u):
        return sum(u[n + i] * u[i] for i in range(n))

    def center(coords):
        return np.concatenate([coords[n:], coords[:n]])

    return GroupoidChart(
        name="pair",
        dim_state=2 * n,
        dim_u=2 * n,
        src_map=src,
        tgt_map=tgt,
        s0=s0,
        center_rule=center,
        validity_note="global",
        validity_box=((-3.0, 3.0),) * (2 * n),
    )


def chart_so3_cayley() -> GroupoidChart:
    """``T*SO(3)`` near the identity in Cayley coordinates; ``u`` are the momenta."""
    return GroupoidChart(
        name="so3_cayley",
        dim_state=3,
        dim_u=3,
        src_map=lambda u, w: cayley_alpha(w, u),
        tgt_map=lambda u, w: cayley_beta(w, u),
        s0=lambda u: 0 * u[0],
        center_rule=lambda coords: np.array(coords, dtype=float),
        validity_note="Cayley coordinates cover SO(3) minus the rotations by pi",
        validity_box=((-3.0, 3.0),) * 3,
    )


def chart_heavy_top() -> GroupoidChart:
    """Action groupoid ``S^2 x SO(3)`` with generating variables ``u = (a, p)``.

    The lifted base momenta are ``p_a = dS/da`` and the group coordinates are
    ``x = -dS/dp``; the opposite signs on the two blocks make ``graph(dS)``
    Lagrangian.  State coordinates are ``(Gamma, Pi)``.
    """

    def raw(u, w):
        a, p = list(u[:3]), list(u[3:])
        p_a = list(w[:3])
        x = [-wi for wi in w[3:]]
        return a, x, p_a, p

    return GroupoidChart(
        name="heavy_top",
        dim_state=6,
        dim_u=6,
        src_map=lambda u, w: heavy_top_alpha(*raw(u, w)),
        tgt_map=lambda u, w: heavy_top_beta(*raw(u, w)),
        s0=lambda u: 0 * u[0],
        center_rule=lambda coords: np.array(coords, dtype=float),
        validity_note="Gamma in ambient R^3; Cayley coordinates on SO(3)",
        validity_box=((-1.0, 1.0),) * 3 + ((-3.0, 3.0),) * 3,
    )


def chart_elroy_beanie() -> GroupoidChart:
    """Gauge groupoid of ``SE(2) x S^1 -> S^1``.

    Generating variables ``u = (p_psi^1, psi_2, P_1, P_2, P_3)``; state
    coordinates ``(psi, p_psi, p1, p2, p3)``.  The pair block uses the
    type-II convention ``psi_1 = dS/dp_psi^1, p_psi^2 = dS/dpsi_2`` and the
    group block ``z = (z1, z2, theta) = dS/dP``.
    """

    def src(u, w):
        return elroy_alpha(w[0], -u[0], u[1], w[1], w[2:], u[2:])

    def tgt(u, w):
        return elroy_beta(w[0], -u[0], u[1], w[1], w[2:], u[2:])

    return GroupoidChart(
        name="elroy_beanie",
        dim_state=5,
        dim_u=5,
        src_map=src,
        tgt_map=tgt,
        s0=lambda u: u[1] * u[0],
        center_rule=lambda c: np.array([c[1], c[0], c[2], c[3], c[4]], dtype=float),
        validity_note="local chart of SE(2) near the identity; psi on the real line",
        validity_box=((-3.0, 3.0),) * 5,
    )


def _euler_base(c):
    return [c[1], c[2], c[0]]


def _euler_base_inverse(c):
    return [c[2], c[0], c[1]]


def chart_so3_euler() -> GroupoidChart:
    """``T*SO(3)`` in Euler angles ``(phi, psi, theta)``; ``u = (p_phi, p_psi, p_theta)``.

    The chart does not contain the identity.  Its base bisection
    ``(phi, psi, theta) = (pi, pi/2, pi/2)`` induces a cyclic permutation of
    ``Pi``, stored as ``base_map``.  The chart is reversed (the target side
    matches the input state), which is the orientation that integrates the
    rigid body forward in time with the ``H o beta`` Hamilton-Jacobi equation.
    """

    def s0(u):
        return math.pi * u[0] + (math.pi / 2) * u[1] + (math.pi / 2) * u[2]

    def center(c):
        # Inverts the target map on the base bisection: beta = (p_phi, -p_theta, p_psi).
        return np.array([c[0], c[2], -c[1]], dtype=float)

    return GroupoidChart(
        name="so3_euler",
        dim_state=3,
        dim_u=3,
        src_map=lambda u, w: euler_alpha(w, u),
        tgt_map=lambda u, w: euler_beta(w, u),
        s0=s0,
        center_rule=center,
        validity_note="0 < theta < pi; singular where sin(theta) = 0",
        validity_box=((-3.0, 3.0),) * 3,
        base_map=_euler_base,
        base_inverse=_euler_base_inverse,
        reverse=True,
    )


def chart_trian2() -> GroupoidChart:
    """``T*Trian(2)`` in the matrix-entry coordinates; identity at ``g = (1, 0, 1)``."""
    return GroupoidChart(
        name="trian2",
        dim_state=3,
        dim_u=3,
        src_map=lambda u, w: trian2_alpha(w, u),
        tgt_map=lambda u, w: trian2_beta(w, u),
        s0=lambda u: u[0] + u[2],
        center_rule=lambda c: np.array(c, dtype=float),
        validity_note="g1 != 0, g3 != 0",
        validity_box=((-3.0, 3.0),) * 3,
    )


_FACTORIES = {
    "pair": chart_pair,
    "so3_cayley": chart_so3_cayley,
    "heavy_top": chart_heavy_top,
    "elroy_beanie": chart_elroy_beanie,
    "so3_euler": chart_so3_euler,
    "trian2": chart_trian2,
}
CHART_NAMES = tuple(_FACTORIES)

_CACHE = {}


def get_chart(name: str, **kwargs) -> GroupoidChart:
    """Look up a chart by its configuration name (instances are cached)."""
    if name not in _FACTORIES:
        raise KeyError(f"unknown chart {name!r}; expected one of {', '.join(CHART_NAMES)}")
    key = (name, tuple(sorted(kwargs.items())))
    if key not in _CACHE:
        _CACHE[key] = _FACTORIES[name](**kwargs)
    return _CACHE[key]
