"""Built-in Hamiltonian systems on duals of Lie algebroids.

Each system carries a scalar-generic Hamiltonian ``H(coords, t)`` (works on
floats and on jets), its Casimirs, the exact right-hand side of the equations
of motion, and the Poisson tensor ``B(x)`` with ``x' = B(x) grad H(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import jets

__all__ = [
    "HamiltonianSystem",
    "rigid_body",
    "symmetric_top",
    "heavy_top",
    "elroy_beanie",
    "harmonic_oscillator",
    "free_particle",
    "make_system",
    "SYSTEM_NAMES",
    "hat",
]


def hat(v) -> np.ndarray:
    """The matrix of ``x -> v x x``."""
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


@dataclass(frozen=True)
class HamiltonianSystem:
    name: str
    params: dict
    hamiltonian: Callable
    casimirs: tuple
    reference_rhs: Callable
    poisson_tensor: Callable
    default_chart: str
    dim: int
    default_state: tuple = ()
    time_dependent: bool = False
    casimir_names: tuple = field(default=())

    def energy(self, coords, t=0.0) -> float:
        return float(self.hamiltonian(list(np.asarray(coords, dtype=float)), t))

    def casimir_values(self, coords) -> np.ndarray:
        x = list(np.asarray(coords, dtype=float))
        return np.array([float(c(x)) for c in self.casimirs])

    def gradient(self, coords, t=0.0) -> np.ndarray:
        """Exact gradient of the Hamiltonian via first-order jets."""
        n = len(coords)
        x = [jets.jet_variable(i, float(coords[i]), n, 1) for i in range(n)]
        return self.hamiltonian(x, t).gradient

    def casimir_gradient(self, index, coords) -> np.ndarray:
        n = len(coords)
        x = [jets.jet_variable(i, float(coords[i]), n, 1) for i in range(n)]
        return self.casimirs[index](x).gradient

    def rhs(self, coords, t=0.0) -> np.ndarray:
        return np.asarray(self.reference_rhs(np.asarray(coords, dtype=float)), dtype=float)


def _rigid_body_rhs(inertia):
    inv = 1.0 / np.asarray(inertia, dtype=float)

    def rhs(x):
        x = np.asarray(x, dtype=float)
        return np.cross(x, inv * x)

    return rhs


def rigid_body(inertia: Sequence[float] = (0.81, 1.0, 0.21)) -> HamiltonianSystem:
    """Free rigid body, ``Pi' = Pi x Omega`` with ``Omega = I^-1 Pi``."""
    I1, I2, I3 = (float(v) for v in inertia)

    def H(x, t=0.0):
        return 0.5 * (x[0] * x[0] / I1 + x[1] * x[1] / I2 + x[2] * x[2] / I3)

    def C(x):
        return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]

    return HamiltonianSystem(
        name="rigid_body",
        params={"inertia": [I1, I2, I3]},
        hamiltonian=H,
        casimirs=(C,),
        casimir_names=("|Pi|^2",),
        reference_rhs=_rigid_body_rhs((I1, I2, I3)),
        poisson_tensor=hat,
        default_chart="so3_cayley",
        dim=3,
        default_state=(1.5, 0.1, 0.0),
    )


def symmetric_top(I: float = 1.0, I_prime: float = 0.21) -> HamiltonianSystem:
    """Rigid body with two equal moments of inertia ``(I, I, I')``."""
    sys = rigid_body((I, I, I_prime))
    return HamiltonianSystem(**{**sys.__dict__, "params": {"I": float(I), "I_prime": float(I_prime)}})


def heavy_top(
    inertia: Sequence[float] = (1.0, 1.5, 2.0),
    m: float = 0.1,
    g: float = 9.8,
    l: float = 0.2,
    e: Sequence[float] = (0.1, 0.2, 0.5),
) -> HamiltonianSystem:
    """Heavy top on ``S^2 x so(3)*``, coordinates ``(Gamma, Pi)``."""
    I1, I2, I3 = (float(v) for v in inertia)
    e = np.asarray(e, dtype=float)
    e = e / np.linalg.norm(e)
    mgl = m * g * l
    mgl_e = mgl * e
    inv = np.array([1 / I1, 1 / I2, 1 / I3])

    def H(x, t=0.0):
        G, P = x[:3], x[3:]
        kinetic = 0.5 * (P[0] * P[0] / I1 + P[1] * P[1] / I2 + P[2] * P[2] / I3)
        return kinetic + (mgl_e[0] * G[0] + mgl_e[1] * G[1] + mgl_e[2] * G[2])

    def C_gamma(x):
        return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]

    def C_cross(x):
        return x[0] * x[3] + x[1] * x[4] + x[2] * x[5]

    def rhs(x):
        G, P = x[:3], x[3:]
        omega = inv * P
        return np.concatenate([np.cross(G, omega), np.cross(P, omega) + np.cross(G, mgl_e)])

    def B(x):
        hg, hp = hat(x[:3]), hat(x[3:])
        return np.block([[np.zeros((3, 3)), hg], [hg, hp]])

    gamma0 = np.array([0.5, 0.5, -0.5]) / np.linalg.norm([0.5, 0.5, -0.5])
    return HamiltonianSystem(
        name="heavy_top",
        params={"inertia": [I1, I2, I3], "m": m, "g": g, "l": l, "e": e.tolist()},
        hamiltonian=H,
        casimirs=(C_gamma, C_cross),
        casimir_names=("|Gamma|^2", "Gamma.Pi"),
        reference_rhs=rhs,
        poisson_tensor=B,
        default_chart="heavy_top",
        dim=6,
        default_state=tuple(gamma0) + (0.1, -1.0, 2.0),
    )


def elroy_beanie(
    m: float = 3.0,
    I1: float = 5.0,
    I2: float = 1.0,
    amplitude: float = 1.0,
    frequency: float = 2.0,
) -> HamiltonianSystem:
    """Elroy's beanie on ``T*S^1 x se(2)*``, coordinates ``(psi, p_psi, p1, p2, p3)``.

    The potential is ``V(psi) = amplitude * cos(frequency * psi)``.
    """

    def V(psi):
        return amplitude * jets.cos(frequency * psi)

    def dV(psi):
        return -amplitude * frequency * np.sin(frequency * psi)

    def H(x, t=0.0):
        psi, pp, p1, p2, p3 = x
        r = p3 - pp
        return (p1 * p1 + p2 * p2) / (2 * m) + pp * pp / (2 * I2) + r * r / (2 * I1) + V(psi)

    def C(x):
        return x[2] * x[2] + x[3] * x[3]

    def rhs(x):
        psi, pp, p1, p2, p3 = x
        r = (p3 - pp) / I1
        return np.array([pp / I2 - r, -dV(psi), -r * p2, r * p1, 0.0])

    def B(x):
        _, _, p1, p2, _ = x
        out = np.zeros((5, 5))
        out[0, 1], out[1, 0] = 1.0, -1.0
        out[2, 4], out[4, 2] = -p2, p2
        out[3, 4], out[4, 3] = p1, -p1
        return out

    return HamiltonianSystem(
        name="elroy_beanie",
        params={"m": m, "I1": I1, "I2": I2, "amplitude": amplitude, "frequency": frequency},
        hamiltonian=H,
        casimirs=(C,),
        casimir_names=("p1^2+p2^2",),
        reference_rhs=rhs,
        poisson_tensor=B,
        default_chart="elroy_beanie",
        dim=5,
        default_state=(1.0, -0.1, 0.1, 0.2, 1.0),
    )


def _canonical(x):
    return np.array([[0.0, 1.0], [-1.0, 0.0]])


def harmonic_oscillator(omega: float = 1.0) -> HamiltonianSystem:
    """``H = (p^2 + omega^2 q^2) / 2`` on ``T*R``, coordinates ``(q, p)``."""
    w2 = float(omega) ** 2

    def H(x, t=0.0):
        return 0.5 * (x[1] * x[1] + w2 * x[0] * x[0])

    return HamiltonianSystem(
        name="harmonic_oscillator",
        params={"omega": float(omega)},
        hamiltonian=H,
        casimirs=(),
        reference_rhs=lambda x: np.array([x[1], -w2 * x[0]]),
        poisson_tensor=_canonical,
        default_chart="pair",
        dim=2,
        default_state=(1.0, 0.0),
    )


def free_particle(mass: float = 1.0) -> HamiltonianSystem:
    """``H = p^2 / (2 mass)`` on ``T*R``."""
    mass = float(mass)

    def H(x, t=0.0):
        return x[1] * x[1] / (2 * mass)

    return HamiltonianSystem(
        name="free_particle",
        params={"mass": mass},
        hamiltonian=H,
        casimirs=(),
        reference_rhs=lambda x: np.array([x[1] / mass, 0.0]),
        poisson_tensor=_canonical,
        default_chart="pair",
        dim=2,
        default_state=(0.0, 1.0),
    )


_FACTORIES = {
    "rigid_body": rigid_body,
    "symmetric_top": symmetric_top,
    "heavy_top": heavy_top,
    "elroy_beanie": elroy_beanie,
    "harmonic_oscillator": harmonic_oscillator,
    "free_particle": free_particle,
}
SYSTEM_NAMES = tuple(_FACTORIES)


def make_system(name: str, **params) -> HamiltonianSystem:
    if name not in _FACTORIES:
        raise KeyError(f"unknown system {name!r}; expected one of {', '.join(SYSTEM_NAMES)}")
    return _FACTORIES[name](**params)
