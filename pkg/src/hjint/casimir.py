"""Casimir-modified Hamiltonians and explicit splitting for the rigid body.

Adding a multiple of a Casimir leaves the equations of motion unchanged but
can make the Hamilton-Jacobi equation trivial.  On the Euler-angle chart the
symmetric top becomes ``H' o beta = c/2 p_psi^2`` once ``|Pi|^2 / (2 I)`` is
subtracted, whose generating function is linear in time.  For the asymmetric
body ``H'`` splits into two such pieces, each an exact rotation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .charts import GroupoidChart, get_chart
from .hj import GeneratingSeries
from .jets import jet_variable
from .systems import HamiltonianSystem, hat

__all__ = [
    "CasimirModification",
    "apply_casimir_modification",
    "euler_quadratic_series",
    "symmetric_top_exact_series",
    "split_coefficients",
    "axis_rotation",
    "split_step",
    "rotation_generator",
    "SPLIT_SCHEMES",
    "SPLIT_ORDERS",
]

SPLIT_SCHEMES = ("lie-trotter", "strang")
SPLIT_ORDERS = ("23", "32")


@dataclass(frozen=True)
class CasimirModification:
    base: HamiltonianSystem
    casimir_index: int
    lam: float

    def hamiltonian(self, x, t=0.0):
        return self.base.hamiltonian(x, t) + self.lam * self.base.casimirs[self.casimir_index](x)


def apply_casimir_modification(system: HamiltonianSystem, casimir_index: int, lam: float) -> HamiltonianSystem:
    """``H + lam * C_i`` with the original reference dynamics.

    Only the Hamiltonian used for series generation changes; ``reference_rhs``
    is kept because a Casimir does not alter the vector field.
    """
    if not system.casimirs:
        raise IndexError(f"system {system.name!r} has no Casimirs")
    if not 0 <= casimir_index < len(system.casimirs):
        raise IndexError(f"casimir_index {casimir_index} out of range for {len(system.casimirs)} Casimirs")
    mod = CasimirModification(system, int(casimir_index), float(lam))
    params = {**system.params, "casimir_index": int(casimir_index), "lambda": float(lam)}
    return HamiltonianSystem(**{**system.__dict__, "hamiltonian": mod.hamiltonian, "params": params})


def euler_quadratic_series(coeff: float, var_index: int, center, chart: GroupoidChart | None = None) -> GeneratingSeries:
    """Closed-form ``S = s0 - coeff * u_i^2 * t`` on the Euler-angle chart.

    This solves the Hamilton-Jacobi equation exactly whenever
    ``H o beta = coeff * u_i^2`` does not depend on the angles.
    """
    chart = chart or get_chart("so3_euler")
    if not 0 <= var_index < chart.dim_u:
        raise IndexError(f"var_index {var_index} out of range")
    center = np.asarray(center, dtype=float)
    nv = chart.dim_u + 1
    t = jet_variable(0, 0.0, nv, 3)
    u = [jet_variable(i + 1, center[i], nv, 3) for i in range(chart.dim_u)]
    S = chart.s0(u) - coeff * u[var_index] * u[var_index] * t
    return GeneratingSeries(chart.name, 1, 3, center, S)


def symmetric_top_exact_series(I: float, I_prime: float, center) -> GeneratingSeries:
    """Exact generating function for ``H' = H - |Pi|^2 / (2 I)``, inertia ``(I, I, I')``.

    ``H' = c/2 Pi_3^2`` with ``c = (I - I') / (I I')``, and ``Pi_3 = p_psi``
    on the Euler chart, so ``S = s0 - c/2 p_psi^2 t``.
    """
    if not (I > 0 and I_prime > 0):
        raise ValueError("moments of inertia must be positive")
    c = (I - I_prime) / (I * I_prime)
    return euler_quadratic_series(0.5 * c, 1, center)


def split_coefficients(I1: float, I2: float, I3: float):
    """``(C1, C2)`` with ``H - |Pi|^2 / (2 I1) = C1 Pi_2^2 + C2 Pi_3^2``."""
    if not (I1 > 0 and I2 > 0 and I3 > 0):
        raise ValueError("moments of inertia must be positive")
    return (I1 - I2) / (2 * I1 * I2), (I1 - I3) / (2 * I1 * I3)


def axis_rotation(state, axis: int, angle: float) -> np.ndarray:
    """Exact flow of ``Pi' = Pi x (angle e_axis)`` for unit time."""
    x = np.asarray(state, dtype=float)
    i, j = (axis + 1) % 3, (axis + 2) % 3
    c, s = math.cos(angle), math.sin(angle)
    out = x.copy()
    # Pi x (a e_k) rotates the (i, j) components by -a.
    out[i] = c * x[i] + s * x[j]
    out[j] = -s * x[i] + c * x[j]
    return out


def _substep(C, axis, h, x):
    return axis_rotation(x, axis, 2.0 * C * x[axis] * h)


def split_step(I1, I2, I3, h, state, scheme: str = "lie-trotter", order: str = "23") -> np.ndarray:
    """One explicit splitting step for the free rigid body.

    The sub-flows of ``C1 Pi_2^2`` and ``C2 Pi_3^2`` are rotations about the
    second and third axes; ``order`` picks which of them comes first.
    """
    if scheme not in SPLIT_SCHEMES:
        raise ValueError(f"unknown split scheme {scheme!r}; expected one of {SPLIT_SCHEMES}")
    if order not in SPLIT_ORDERS:
        raise ValueError(f"unknown split order {order!r}; expected one of {SPLIT_ORDERS}")
    C1, C2 = split_coefficients(I1, I2, I3)
    first, second = ((C1, 1), (C2, 2)) if order == "23" else ((C2, 2), (C1, 1))
    x = np.asarray(state, dtype=float)
    if scheme == "lie-trotter":
        x = _substep(*first, h, x)
        return _substep(*second, h, x)
    x = _substep(*first, 0.5 * h, x)
    x = _substep(*second, h, x)
    return _substep(*first, 0.5 * h, x)


def rotation_generator(state, axis, coeff):
    """Right-hand side of one sub-flow, ``Pi x grad(coeff Pi_axis^2)``."""
    x = np.asarray(state, dtype=float)
    g = np.zeros(3)
    g[axis] = 2.0 * coeff * x[axis]
    return hat(x) @ g
