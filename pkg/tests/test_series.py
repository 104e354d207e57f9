from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from guderley.errors import DomainError
from guderley.model import eval_FGD, eval_partials, make_config, z_max, z_min
from guderley.series import (
    Branch,
    converged_expansion,
    eval_expansion,
    expand,
    recurrence_AB,
    sonic_slopes,
    star_point,
)
from oracles import brute_force_coefficients, quadratic_roots


@st.composite
def configs(draw):
    gamma = draw(st.floats(1.05, 3.0))
    m = draw(st.sampled_from([1, 2]))
    which = draw(st.sampled_from([Branch.P6, Branch.P8]))
    lo = z_min(gamma) if which is Branch.P6 else 0.02 * z_max(gamma)
    z = draw(st.floats(lo, z_max(gamma)))
    return make_config(gamma, m, z), which


@given(configs())
def test_branch_choice(cw):
    cfg, which = cw
    c_neg, c_pos, R = sonic_slopes(cfg, which)
    assert R >= 0.0
    assert c_neg < 0.0 <= c_pos
    d = eval_partials(cfg, star_point(cfg, which))
    for c in (c_neg, c_pos):
        res = -d.G_C * c * c + (d.F_C - d.G_V) * c + d.F_V
        assert abs(res) < 1e-10 * (1 + abs(d.F_C) + abs(d.G_V) + abs(d.F_V))


@given(configs())
def test_nonvanishing_condition(cw):
    cfg, which = cw
    c1, _, R = sonic_slopes(cfg, which)
    d = eval_partials(cfg, star_point(cfg, which))

    def f(ell):
        return d.F_C - d.G_C * c1 - ell * (d.G_V + d.G_C * c1)

    assert f(1) == pytest.approx(-R, abs=1e-10)
    assert all(f(ell) < 0 for ell in range(2, 60))


def test_slope_against_polynomial_solver():
    cfg = make_config(2.0, 1, 0.1)
    d = eval_partials(cfg, star_point(cfg, "P8"))
    roots = quadratic_roots(-d.G_C, d.F_C - d.G_V, d.F_V)
    c_neg, c_pos, _ = sonic_slopes(cfg, "P8")
    assert c_neg == pytest.approx(roots[0], abs=1e-12)
    assert c_pos == pytest.approx(roots[1], abs=1e-12)


def test_p6_at_zm_has_real_opposite_slopes():
    cfg = make_config(2.0, 1, 1 / 9)
    c_neg, c_pos, R = sonic_slopes(cfg, "P6")
    assert R > 0 and c_neg < 0 < c_pos


def test_p6_below_zm_refused():
    with pytest.raises(DomainError):
        expand(make_config(2.0, 1, 0.05), "P6")


@pytest.mark.parametrize("which", ["P6", "P8"])
def test_recurrence_matches_series_multiplication(which):
    gamma, m, z = 1.6, 2, 0.9 * z_max(1.6)
    ref = brute_force_coefficients(gamma, m, z, which, 12)
    got = expand(make_config(gamma, m, z), which, 12).c
    for a, b in zip(got, ref):
        assert a == pytest.approx(b, rel=1e-10, abs=1e-14)


def test_recurrence_row_closes():
    cfg = make_config(2.0, 1, 0.1)
    exp = expand(cfg, "P8", 20)
    for ell in range(2, 12):
        A, B = recurrence_AB(cfg, "P8", exp.c[:ell], ell)
        assert A * exp.c[ell] - B == pytest.approx(0.0, abs=1e-12 * abs(B) + 1e-15)


def test_coefficient_bound():
    exp = expand(make_config(2.0, 1, 0.1), "P8", 20)
    for ell in range(2, 21):
        assert abs(exp.c[ell]) <= exp.K_est ** (ell - 1) / ell**3 * (1 + 1e-12)


@given(configs())
def test_coefficient_bound_random(cw):
    exp = expand(*cw, 40)
    for ell in range(2, 41):
        assert abs(exp.c[ell]) <= exp.K_est ** (ell - 1) / ell**3 * (1 + 1e-12)


def test_truncation_refinement():
    cfg = make_config(2.0, 1, 0.1)
    a, b = expand(cfg, "P8", 20), expand(cfg, "P8", 40)
    for s in (-1, 1):
        V = a.star.V + s * a.radius_est / 4
        assert abs(eval_expansion(a, V)[0] - eval_expansion(b, V)[0]) < 1e-10


def test_center_value():
    exp = expand(make_config(1.4, 2, 0.1), "P6", 30)
    C, dC = eval_expansion(exp, exp.star.V)
    assert (C, dC) == (exp.star.C, exp.c1)


@given(configs())
def test_ode_residual_inside_radius(cw):
    exp = converged_expansion(*cw)
    for s in (-1, 1):
        V = exp.star.V + s * exp.radius_est / 4
        C, dC = eval_expansion(exp, V)
        F, G, _ = eval_FGD(exp.cfg, (V, C))
        assert abs(dC * G - F) <= 1e-8 * (1 + abs(F))


def test_out_of_radius_refused():
    exp = expand(make_config(1.4, 2, 0.1), "P6", 30)
    with pytest.raises(DomainError):
        eval_expansion(exp, exp.star.V + exp.radius_est)


@pytest.mark.parametrize("gamma", [1.2, 2.0, 3.0])
def test_expansions_coincide_at_zmax(gamma):
    cfg = make_config(gamma, 2, z_max(gamma))
    a, b = expand(cfg, "P6", 30), expand(cfg, "P8", 30)
    assert np.allclose(a.c, b.c, rtol=1e-12, atol=1e-12)


def test_coefficients_continuous_in_z():
    gamma = 1.4
    zs = np.linspace(0.145, 0.148, 11)
    table = np.array([expand(make_config(gamma, 2, z), "P6", 12).c[:6] for z in zs])
    steps = np.abs(np.diff(table, axis=0))
    assert np.all(steps < 0.05 * (1 + np.abs(table[1:])))
    assert math.isfinite(table.sum())
