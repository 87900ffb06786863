import math

import numpy as np
import pytest

from hjint.charts import (
    CHART_NAMES,
    GroupoidChart,
    cayley_alpha,
    cayley_beta,
    cayley_rotation,
    chart_pair,
    elroy_alpha,
    elroy_beta,
    euler_alpha,
    euler_beta,
    get_chart,
    heavy_top_alpha,
    heavy_top_beta,
    s0_gradient,
    trian2_alpha,
    trian2_beta,
)
from hjint.errors import ChartSelfTestError, SingularDivisionError
from hjint.jets import jet_constant, jet_variable


def values(xs):
    return np.array([x.value if hasattr(x, "value") else x for x in xs], dtype=float)


@pytest.mark.parametrize("name", CHART_NAMES)
def test_identity_self_test_100_states(name):
    chart = get_chart(name)
    rng = np.random.default_rng(0)
    worst = max(chart.identity_residual(x) for x in chart.sample_states(100, rng))
    assert worst <= 1e-10
    assert chart.dim_u == chart.dim_state


@pytest.mark.parametrize("name", CHART_NAMES)
def test_maps_are_scalar_generic(name):
    chart = get_chart(name)
    rng = np.random.default_rng(1)
    x = chart.sample_states(1, rng)[0]
    u = np.asarray(chart.center_rule(x)) + 0.05 * rng.normal(size=chart.dim_u)
    w = s0_gradient(chart.s0, u) + 0.05 * rng.normal(size=chart.dim_u)
    m = chart.dim_u
    uj = [jet_constant(float(v), m, 0) for v in u]
    wj = [jet_constant(float(v), m, 0) for v in w]
    for fn in (chart.src_map, chart.tgt_map):
        plain = values(fn(list(u), list(w)))
        jet = values(fn(uj, wj))
        assert np.array_equal(plain, jet)


def test_bad_chart_refuses_to_construct():
    with pytest.raises(ChartSelfTestError):
        GroupoidChart(
            name="broken",
            dim_state=1,
            dim_u=1,
            src_map=lambda u, w: [u[0]],
            tgt_map=lambda u, w: [u[0] + 1.0],
            s0=lambda u: 0 * u[0],
            center_rule=lambda c: np.array(c),
            validity_note="",
            validity_box=((-1.0, 1.0),),
        )


def test_unknown_chart_name():
    with pytest.raises(KeyError):
        get_chart("so4")


# -- pair groupoid ----------------------------------------------------------------


def test_pair_identity_at_s0():
    chart = chart_pair(1)
    u = [0.7, -1.2]  # (y, q)
    w = s0_gradient(chart.s0, u)
    assert np.allclose(chart.src_map(u, w), [-1.2, 0.7])
    assert np.allclose(chart.tgt_map(u, w), [-1.2, 0.7])


def test_pair_free_particle_exact_flow():
    # S = q y - t y^2 / 2: dS/dy = q - t y, dS/dq = y.
    chart = chart_pair(1)
    q0, p0, t = 0.3, 1.7, 0.4
    y, q = p0, q0 + t * p0
    w = [q - t * y, y]
    assert np.allclose(chart.src_map([y, q], w), [q0, p0])
    assert np.allclose(chart.tgt_map([y, q], w), [q0 + t * p0, p0])


def test_pair_two_dof_identity():
    chart = chart_pair(2)
    rng = np.random.default_rng(2)
    for _ in range(10):
        qp = rng.normal(size=4)
        u = chart.center_rule(qp)
        w = s0_gradient(chart.s0, u)
        assert np.allclose(chart.src_map(list(u), list(w)), qp)
        assert np.allclose(chart.tgt_map(list(u), list(w)), qp)


def test_pair_rejects_zero_dimension():
    with pytest.raises(ValueError):
        chart_pair(0)


# -- SO(3) Cayley -------------------------------------------------------------------


def test_cayley_identity_element():
    p = [0.3, -1.1, 2.0]
    assert np.allclose(cayley_alpha([0, 0, 0], p), p)
    assert np.allclose(cayley_beta([0, 0, 0], p), p)


def test_cayley_printed_rows():
    # x = 1, y = z = 0, p = (0, 0, 1): rows read (xz/4 - y/2, yz/4 + x/2, z^2/4 + 1)
    assert np.allclose(cayley_alpha([1, 0, 0], [0, 0, 1]), [0.0, 0.5, 1.0])
    assert np.allclose(cayley_beta([1, 0, 0], [0, 0, 1]), [0.0, -0.5, 1.0])


def test_cayley_linear_parts_are_opposite():
    x = [jet_variable(i, 0.0, 3, 2) for i in range(3)]
    p = [0.4, -0.7, 1.3]
    total = [a + b - 2 * pi for a, b, pi in zip(cayley_alpha(x, p), cayley_beta(x, p), p)]
    for comp in total:
        assert np.allclose(comp.gradient, 0.0, atol=1e-15)
    # and the linear part of alpha is -x cross p / 2
    lin = np.array([c.gradient for c in cayley_alpha(x, p)])
    e = np.eye(3)
    expect = np.array([-0.5 * np.cross(e[j], p) for j in range(3)]).T
    assert np.allclose(lin, expect)


# -- heavy top ------------------------------------------------------------------------


def test_heavy_top_identity():
    a, p = [0.6, 0.0, -0.8], [0.1, -1.0, 2.0]
    out_s = heavy_top_alpha(a, [0, 0, 0], [0, 0, 0], p)
    out_t = heavy_top_beta(a, [0, 0, 0], [0, 0, 0], p)
    assert np.allclose(out_s, a + p)
    assert np.allclose(out_t, a + p)


def test_heavy_top_source_momentum_shift():
    a, p_a, p = [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.2, 0.3, 0.4]
    out = heavy_top_alpha(a, [0, 0, 0], p_a, p)
    assert np.allclose(out[3:], [0.2, 0.3, 1.4])  # a x p_a = e3


def test_cayley_rotation_is_orthogonal():
    rng = np.random.default_rng(3)
    for _ in range(100):
        x = rng.normal(size=3) * 2
        a = rng.normal(size=3)
        assert abs(np.linalg.norm(cayley_rotation(x, a)) - np.linalg.norm(a)) <= 1e-13
        out = heavy_top_beta(list(a), list(x), [0, 0, 0], [0, 0, 0])
        assert abs(np.linalg.norm(out[:3]) - np.linalg.norm(a)) <= 1e-13


# -- Elroy's beanie ---------------------------------------------------------------------


def test_beanie_identity():
    chart = get_chart("elroy_beanie")
    u = [0.4, 1.1, 0.1, 0.2, 1.0]  # (p_psi^1, psi_2, P)
    w = s0_gradient(chart.s0, u)
    expect = [1.1, 0.4, 0.1, 0.2, 1.0]
    assert np.allclose(chart.src_map(u, w), expect)
    assert np.allclose(chart.tgt_map(u, w), expect)


def test_beanie_target_rotation_quarter_turn():
    out = elroy_beta(0, 0, 0, 0, [0, 0, math.pi / 2], [0.3, 0.7, 1.0])
    assert np.allclose(out[2:], [0.7, -0.3, 1.0])


def test_beanie_source_shift():
    out = elroy_alpha(0, 0, 0, 0, [0.5, 2.0, 0.0], [1.0, 3.0, 0.25])
    assert np.allclose(out[2:], [1.0, 3.0, 0.25 - 1.0 * 2.0 + 3.0 * 0.5])


# -- Euler angles ------------------------------------------------------------------------


def test_euler_bisection_evaluations():
    p = [0.3, -0.5, 1.7]  # (p_phi, p_psi, p_theta)
    L = [math.pi, math.pi / 2, math.pi / 2]
    assert np.allclose(euler_alpha(L, p), [-1.7, -0.5, 0.3])
    assert np.allclose(euler_beta(L, p), [0.3, -1.7, -0.5])


def test_euler_base_map_is_cyclic():
    chart = get_chart("so3_euler")
    pi = np.array([1.0, 2.0, 3.0])
    out = chart.apply_base(pi)
    cyclic = [np.roll(pi, k) for k in (1, 2)]
    assert any(np.array_equal(out, c) for c in cyclic)
    assert np.array_equal(chart.apply_base_inverse(out), pi)


def test_euler_center_succeeds_at_half_pi():
    assert all(np.isfinite(euler_alpha([math.pi, 0.0, math.pi / 2], [1, 1, 1])))


@pytest.mark.parametrize("theta", [0.0, 5e-9, math.pi, math.pi - 5e-9])
def test_euler_pole_is_singular(theta):
    with pytest.raises(SingularDivisionError):
        euler_alpha([0.1, 0.2, theta], [1.0, 1.0, 1.0])
    with pytest.raises(SingularDivisionError):
        euler_beta([0.1, 0.2, theta], [1.0, 1.0, 1.0])


# -- Trian(2) ----------------------------------------------------------------------------


def test_trian2_identity_point():
    p = [0.3, -0.2, 0.9]
    assert np.allclose(trian2_alpha([1, 0, 1], p), p)
    assert np.allclose(trian2_beta([1, 0, 1], p), p)


def test_trian2_printed_values():
    assert np.allclose(trian2_alpha([2, 0, 1], [1, 0, 0]), [2, 0, 0])
    assert np.allclose(trian2_beta([1, 1, 1], [0, 1, 0]), [0, 1, 1])
