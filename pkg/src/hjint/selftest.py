"""Quick built-in checks behind ``hjint selftest``."""

from __future__ import annotations

import numpy as np

from .charts import CHART_NAMES, get_chart
from .jets import Jet, jet_eval, jet_sin_cos, jet_variable, monomials

__all__ = ["run_selftest", "brute_force_product"]


def brute_force_product(a: Jet, b: Jet) -> Jet:
    """Truncated product by explicit double loop over monomials (test oracle)."""
    exps = monomials(a.num_vars, a.degree_cap)
    index = {tuple(e): i for i, e in enumerate(exps)}
    out = np.zeros(len(exps))
    for i, ei in enumerate(exps):
        if a.coeffs[i] == 0.0:
            continue
        for j, ej in enumerate(exps):
            k = index.get(tuple(ei + ej))
            if k is not None:
                out[k] += a.coeffs[i] * b.coeffs[j]
    return Jet(a.num_vars, a.degree_cap, out)


def _check_charts():
    worst = 0.0
    rng = np.random.default_rng(0)
    for name in CHART_NAMES:
        chart = get_chart(name)
        for x in chart.sample_states(20, rng):
            worst = max(worst, chart.identity_residual(x))
    return worst <= 1e-10, f"max identity residual {worst:.2e} over {len(CHART_NAMES)} charts"


def _check_products(n=50):
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(n):
        nv, cap = int(rng.integers(1, 4)), int(rng.integers(0, 5))
        size = len(monomials(nv, cap))
        a = Jet(nv, cap, rng.normal(size=size))
        b = Jet(nv, cap, rng.normal(size=size))
        ref = brute_force_product(a, b).coeffs
        scale = max(1.0, float(np.max(np.abs(ref))))
        worst = max(worst, float(np.max(np.abs((a * b).coeffs - ref))) / scale)
    return worst <= 1e-13, f"max relative product deviation {worst:.2e} on {n} pairs"


def _check_trig():
    x = [jet_variable(i, 0.3 * (i + 1), 3, 6) for i in range(3)]
    s, c = jet_sin_cos(x[0] * x[1] + x[2])
    one = s * s + c * c
    dev = float(np.max(np.abs(one.coeffs - np.eye(1, len(one.coeffs))[0])))
    return dev <= 1e-13, f"sin^2 + cos^2 - 1 coefficient deviation {dev:.2e}"


def _check_eval():
    rng = np.random.default_rng(2)
    a = Jet(2, 4, rng.normal(size=len(monomials(2, 4))))
    d = np.array([0.1, -0.2])
    direct = sum(c * np.prod(d**e) for c, e in zip(a.coeffs, monomials(2, 4)))
    dev = abs(jet_eval(a, d) - direct)
    return dev <= 1e-14, f"evaluation deviation {dev:.2e}"


CHECKS = {
    "chart identity bisections": _check_charts,
    "jet products vs brute force": _check_products,
    "jet trigonometric identity": _check_trig,
    "jet evaluation": _check_eval,
}


def run_selftest():
    """Run every check; returns a list of ``(name, ok, detail)``."""
    results = []
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn()
        except Exception as exc:  # report, do not crash the harness
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
