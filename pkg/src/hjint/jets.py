"""Truncated multivariate power series ("jets").

A :class:`Jet` is a polynomial in ``num_vars`` variables truncated at total
degree ``degree_cap``.  Variable 0 plays the role of time ``t`` in the
Hamilton-Jacobi recursion, variables ``1..m`` are chart variables, but the
algebra itself treats all variables alike.  Coefficients are stored densely in
graded order (degree 0 first, then degree 1, ...), and within a degree in
descending lexicographic order, so that the linear coefficient of variable
``i`` always sits at position ``1 + i``.

Elementary functions are evaluated by Maclaurin expansion in the nilpotent
part ``a - a(0)``, which terminates after ``degree_cap`` terms.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import SingularDivisionError

__all__ = [
    "Jet",
    "jet_variable",
    "jet_constant",
    "jet_add",
    "jet_sub",
    "jet_mul",
    "jet_div",
    "jet_sin_cos",
    "jet_sqrt",
    "jet_exp",
    "jet_partial",
    "jet_eval",
    "sin",
    "cos",
    "sqrt",
    "exp",
    "jet_substitute",
    "monomials",
]

# Constant terms smaller than this are treated as zero divisors.
SINGULAR_DIVISION_TOL = 1e-13


def _compositions(total, parts):
    """All exponent tuples of length ``parts`` summing to ``total``, lex-descending."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def monomials(num_vars: int, degree_cap: int) -> np.ndarray:
    """Exponent table of shape (n_monomials, num_vars) in graded order."""
    rows = [c for d in range(degree_cap + 1) for c in _compositions(d, num_vars)]
    table = np.array(rows, dtype=np.int64).reshape(len(rows), num_vars)
    table.flags.writeable = False
    return table


class _Layout:
    """Index tables shared by all jets of one shape."""

    def __init__(self, num_vars, degree_cap):
        self.num_vars = num_vars
        self.degree_cap = degree_cap
        self.exps = monomials(num_vars, degree_cap)
        self.size = len(self.exps)
        self.degree = self.exps.sum(axis=1)
        base = degree_cap + 1
        self._weights = base ** np.arange(num_vars, dtype=np.int64)
        keys = self.exps @ self._weights
        self._order = np.argsort(keys)
        self._sorted_keys = keys[self._order]
        self._mul = None
        self._partials = {}

    def index_of(self, keys):
        pos = np.searchsorted(self._sorted_keys, keys)
        return self._order[pos]

    def index(self, multi_index):
        if len(multi_index) != self.num_vars or sum(multi_index) > self.degree_cap:
            raise KeyError(multi_index)
        key = int(np.dot(multi_index, self._weights))
        return int(self.index_of(np.array([key]))[0])

    @property
    def mul_tables(self):
        # Pairs (i, j) whose product survives truncation, and the slot k = i + j.
        if self._mul is None:
            keys = self.exps @ self._weights
            ii, jj = [], []
            for i in range(self.size):
                room = self.degree_cap - self.degree[i]
                # Graded order: monomials of degree <= room form a prefix.
                n_j = int(np.searchsorted(self.degree, room, side="right"))
                ii.append(np.full(n_j, i, dtype=np.int64))
                jj.append(np.arange(n_j, dtype=np.int64))
            ii = np.concatenate(ii)
            jj = np.concatenate(jj)
            kk = self.index_of(keys[ii] + keys[jj])
            self._mul = (ii, jj, kk)
        return self._mul

    def partial_tables(self, var):
        if var not in self._partials:
            src = np.nonzero(self.exps[:, var] > 0)[0]
            shifted = self.exps[src].copy()
            shifted[:, var] -= 1
            dst = self.index_of(shifted @ self._weights)
            factor = self.exps[src, var].astype(float)
            self._partials[var] = (src, dst, factor)
        return self._partials[var]


@lru_cache(maxsize=None)
def _layout(num_vars, degree_cap):
    return _Layout(num_vars, degree_cap)


class Jet:
    """Immutable truncated power series.

    Supports ``+ - * /`` and integer powers with other jets of the same shape
    and with real scalars.  Use :func:`sin`, :func:`cos`, :func:`sqrt` and
    :func:`exp` for elementary functions; they also accept plain floats, which
    keeps chart and Hamiltonian code generic over the scalar type.
    """

    __slots__ = ("_layout", "_c")
    __array_ufunc__ = None  # make numpy scalars defer to our reflected operators

    def __init__(self, num_vars: int, degree_cap: int, coeffs=None):
        if num_vars < 1 or degree_cap < 0:
            raise ValueError("num_vars must be >= 1 and degree_cap >= 0")
        layout = _layout(num_vars, degree_cap)
        if coeffs is None:
            c = np.zeros(layout.size)
        else:
            c = np.array(coeffs, dtype=float)
            if c.shape != (layout.size,):
                raise ValueError(f"expected {layout.size} coefficients, got shape {c.shape}")
            if not np.all(np.isfinite(c)):
                raise ValueError("jet coefficients must be finite")
        c.flags.writeable = False
        self._layout = layout
        self._c = c

    @classmethod
    def _wrap(cls, layout, c):
        out = cls.__new__(cls)
        c.flags.writeable = False
        out._layout = layout
        out._c = c
        return out

    @classmethod
    def from_dict(cls, num_vars, degree_cap, terms):
        """Build from ``{multi_index: coefficient}``; terms above the cap are dropped."""
        layout = _layout(num_vars, degree_cap)
        c = np.zeros(layout.size)
        for mi, value in terms.items():
            if sum(mi) <= degree_cap:
                c[layout.index(tuple(mi))] += value
        return cls._wrap(layout, c)

    # -- shape and access -------------------------------------------------

    @property
    def num_vars(self) -> int:
        return self._layout.num_vars

    @property
    def degree_cap(self) -> int:
        return self._layout.degree_cap

    @property
    def coeffs(self) -> np.ndarray:
        """Read-only coefficient vector in graded order (see :func:`monomials`)."""
        return self._c

    @property
    def value(self) -> float:
        """Constant term."""
        return float(self._c[0])

    @property
    def gradient(self) -> np.ndarray:
        """Degree-1 coefficients, i.e. first partial derivatives at the center."""
        return self._c[1 : 1 + self.num_vars].copy()

    def coeff(self, multi_index: Sequence[int]) -> float:
        if sum(multi_index) > self.degree_cap:
            return 0.0
        return float(self._c[self._layout.index(tuple(multi_index))])

    def to_dict(self, tol=0.0):
        return {
            tuple(int(e) for e in mi): float(v)
            for mi, v in zip(self._layout.exps, self._c)
            if abs(v) > tol
        }

    def same_shape(self, other: "Jet") -> bool:
        return self._layout is other._layout

    def _check(self, other):
        if self._layout is not other._layout:
            raise ValueError(
                "jet shape mismatch: "
                f"({self.num_vars}, {self.degree_cap}) vs ({other.num_vars}, {other.degree_cap})"
            )

    def truncate(self, degree_cap: int) -> "Jet":
        """Drop all terms of total degree above ``degree_cap`` (may also raise the cap)."""
        layout = _layout(self.num_vars, degree_cap)
        if degree_cap <= self.degree_cap:
            return Jet._wrap(layout, self._c[: layout.size].copy())
        c = np.zeros(layout.size)
        c[: self._layout.size] = self._c
        return Jet._wrap(layout, c)

    def slice_power(self, var: int, power: int) -> "Jet":
        """Keep only the terms in which ``var`` appears with exactly ``power``."""
        mask = self._layout.exps[:, var] == power
        return Jet._wrap(self._layout, np.where(mask, self._c, 0.0))

    def max_power(self, var: int) -> int:
        """Largest exponent of ``var`` carrying a nonzero coefficient (-1 if none)."""
        nz = self._c != 0.0
        if not nz.any():
            return -1
        return int(self._layout.exps[nz, var].max())

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return other
        return None

    def __neg__(self):
        return Jet._wrap(self._layout, -self._c)

    def __pos__(self):
        return self

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            c = self._c.copy()
            c[0] += other
            return Jet._wrap(self._layout, c)
        return Jet._wrap(self._layout, self._c + o._c)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            c = self._c.copy()
            c[0] -= other
            return Jet._wrap(self._layout, c)
        return Jet._wrap(self._layout, self._c - o._c)

    def __rsub__(self, other):
        c = -self._c
        c[0] += other
        return Jet._wrap(self._layout, c)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return Jet._wrap(self._layout, self._c * other)
        layout = self._layout
        a, b = self._c, o._c
        if layout.degree_cap <= 1:
            c = a[0] * b + b[0] * a
            c[0] = a[0] * b[0]
            return Jet._wrap(layout, c)
        ii, jj, kk = layout.mul_tables
        c = np.bincount(kk, weights=a[ii] * b[jj], minlength=layout.size)
        return Jet._wrap(layout, c)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        a0 = self._c[0]
        if abs(a0) < SINGULAR_DIVISION_TOL:
            raise SingularDivisionError(f"division by series with constant term {a0:.3e}")
        if self.degree_cap <= 1:
            c = -self._c / (a0 * a0)
            c[0] = 1.0 / a0
            return Jet._wrap(self._layout, c)
        # 1/(a0 + x) = (1/a0) * sum_n (-x/a0)^n, Horner form.
        y = (self - a0) * (-1.0 / a0)
        r = y + 1.0
        for _ in range(self.degree_cap - 1):
            r = y * r + 1.0
        return r * (1.0 / a0)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if abs(other) < SINGULAR_DIVISION_TOL:
                raise SingularDivisionError(f"division by scalar {other:.3e}")
            return Jet._wrap(self._layout, self._c / other)
        return _exact_value(self * o.reciprocal(), self._c[0] / o._c[0])

    def __rtruediv__(self, other):
        return _exact_value(self.reciprocal() * other, other / self._c[0])

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)) or n < 0:
            return NotImplemented
        result = Jet._wrap(self._layout, np.zeros(self._layout.size))
        result = result + 1.0
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- calculus ----------------------------------------------------------

    def partial(self, var: int) -> "Jet":
        if not 0 <= var < self.num_vars:
            raise IndexError(f"variable index {var} out of range for {self.num_vars} variables")
        src, dst, factor = self._layout.partial_tables(var)
        c = np.zeros(self._layout.size)
        c[dst] = self._c[src] * factor
        return Jet._wrap(self._layout, c)

    def __call__(self, offsets):
        return jet_eval(self, offsets)

    def __repr__(self):
        terms = self.to_dict(tol=0.0)
        shown = ", ".join(f"{k}: {v:.6g}" for k, v in list(terms.items())[:6])
        more = "" if len(terms) <= 6 else f", ... ({len(terms)} terms)"
        return f"Jet(num_vars={self.num_vars}, degree_cap={self.degree_cap}, {{{shown}{more}}})"


def _exact_value(a: Jet, v: float) -> Jet:
    # Quotients keep the constant term of the plain float division, so that
    # maps evaluated on reals and on jets agree bit for bit.
    c = a._c.copy()
    c[0] = v
    return Jet._wrap(a._layout, c)


# -- functional interface ----------------------------------------------------


def jet_constant(value: float, num_vars: int, degree_cap: int) -> Jet:
    layout = _layout(num_vars, degree_cap)
    c = np.zeros(layout.size)
    c[0] = value
    return Jet._wrap(layout, c)


def jet_variable(index: int, base_value: float, num_vars: int, degree_cap: int) -> Jet:
    """The series ``base_value + (x_index - center)``."""
    if not 0 <= index < num_vars:
        raise IndexError(f"variable index {index} out of range for {num_vars} variables")
    layout = _layout(num_vars, degree_cap)
    c = np.zeros(layout.size)
    c[0] = base_value
    if degree_cap >= 1:
        c[1 + index] = 1.0
    return Jet._wrap(layout, c)


def jet_add(a: Jet, b: Jet) -> Jet:
    a._check(b)
    return a + b


def jet_sub(a: Jet, b: Jet) -> Jet:
    a._check(b)
    return a - b


def jet_mul(a: Jet, b: Jet) -> Jet:
    a._check(b)
    return a * b


def jet_div(a: Jet, b: Jet) -> Jet:
    a._check(b)
    return a / b


def _nilpotent_powers(a: Jet):
    """[x^0, x^1, ..., x^cap] for x = a - a(0)."""
    x = a - a.value
    powers = [jet_constant(1.0, a.num_vars, a.degree_cap)]
    for _ in range(a.degree_cap):
        powers.append(powers[-1] * x)
    return powers


def jet_sin_cos(a: Jet):
    """``(sin a, cos a)`` by expansion around the constant term."""
    a0 = a.value
    powers = _nilpotent_powers(a)
    sx = jet_constant(0.0, a.num_vars, a.degree_cap)
    cx = jet_constant(0.0, a.num_vars, a.degree_cap)
    for n, p in enumerate(powers):
        coef = 1.0 / math.factorial(n)
        if n % 4 == 0:
            cx = cx + p * coef
        elif n % 4 == 1:
            sx = sx + p * coef
        elif n % 4 == 2:
            cx = cx - p * coef
        else:
            sx = sx - p * coef
    s0, c0 = math.sin(a0), math.cos(a0)
    return sx * c0 + cx * s0, cx * c0 - sx * s0


def jet_sqrt(a: Jet) -> Jet:
    a0 = a.value
    if a0 <= SINGULAR_DIVISION_TOL:
        raise SingularDivisionError(f"sqrt of series with constant term {a0:.3e}")
    y = (a - a0) * (1.0 / a0)
    # Binomial series of (1 + y)^(1/2), Horner form.
    cap = a.degree_cap
    coefs = [1.0]
    for n in range(1, cap + 1):
        coefs.append(coefs[-1] * (0.5 - (n - 1)) / n)
    r = jet_constant(coefs[cap], a.num_vars, cap)
    for n in range(cap - 1, -1, -1):
        r = r * y + coefs[n]
    return r * math.sqrt(a0)


def jet_exp(a: Jet) -> Jet:
    powers = _nilpotent_powers(a)
    r = jet_constant(0.0, a.num_vars, a.degree_cap)
    for n, p in enumerate(powers):
        r = r + p * (1.0 / math.factorial(n))
    return r * math.exp(a.value)


def jet_partial(a: Jet, var: int) -> Jet:
    return a.partial(var)


def jet_eval(a: Jet, offsets) -> float:
    """Evaluate the truncated polynomial at ``center + offsets``."""
    offsets = np.asarray(offsets)
    if offsets.shape != (a.num_vars,):
        raise ValueError(f"expected {a.num_vars} offsets, got shape {offsets.shape}")
    mono = np.prod(offsets[None, :] ** a._layout.exps, axis=1)
    return mono @ a.coeffs


# -- scalar-generic elementary functions -------------------------------------


def sin(x):
    if isinstance(x, Jet):
        return jet_sin_cos(x)[0]
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        return jet_sin_cos(x)[1]
    return np.cos(x)


def sqrt(x):
    if isinstance(x, Jet):
        return jet_sqrt(x)
    return np.sqrt(x)


def exp(x):
    if isinstance(x, Jet):
        return jet_exp(x)
    return np.exp(x)


def jet_substitute(a: Jet, var: int, value: float) -> Jet:
    """Substitute ``x_var - center = value``; the result has one variable fewer."""
    if a.num_vars < 2:
        raise ValueError("cannot eliminate the only variable of a jet")
    if not 0 <= var < a.num_vars:
        raise IndexError(f"variable index {var} out of range for {a.num_vars} variables")
    src = a._layout
    dst = _layout(a.num_vars - 1, a.degree_cap)
    keep = np.delete(src.exps, var, axis=1)
    idx = dst.index_of(keep @ dst._weights)
    weights = a.coeffs * float(value) ** src.exps[:, var]
    return Jet._wrap(dst, np.bincount(idx, weights=weights, minlength=dst.size))
