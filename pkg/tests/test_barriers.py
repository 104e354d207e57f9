from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from guderley.barriers import (
    POLYNOMIAL_CLAIMS,
    barrier_suite,
    c8_concavity,
    c8_derivatives,
    check_trajectory_barriers,
    delta_bound,
    delta_ordering,
    frak_B,
    frak_B_s,
    slope_inequalities,
)
from guderley.errors import DomainError, SingularityError
from guderley.model import (
    eval_F,
    eval_G,
    fg_decomposition,
    gamma_star,
    jump_state,
    k_coeff,
    make_config,
    sonic_points,
    z_g,
    z_max,
    z_min,
    z_one,
    z_two,
)
from guderley.series import Branch


@given(st.floats(1.05, 3.0), st.sampled_from([1, 2]), st.floats(0.01, 1.0),
       st.floats(-0.99, -0.01), st.floats(0.3, 2.0))
def test_frak_B_identity(gamma, m, frac, V, kappa):
    cfg = make_config(gamma, m, frac * z_max(gamma))
    C = math.sqrt(-kappa * V)
    lhs = math.sqrt(-kappa * V) * frak_B(V, cfg, kappa) / 2
    rhs = eval_F(cfg, V, C) + 0.5 * math.sqrt(kappa / -V) * eval_G(cfg, V, C)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@given(st.floats(1.05, 3.0), st.sampled_from([1, 2]), st.floats(0.01, 1.0), st.floats(-0.99, -0.01))
def test_frak_B_s_identity(gamma, m, frac, V):
    cfg = make_config(gamma, m, frac * z_max(gamma))
    r = math.sqrt(gamma / 2)
    C = -r * V
    lhs = eval_F(cfg, V, C) + r * eval_G(cfg, V, C)
    assert lhs == pytest.approx(-m * r * V * V * frak_B_s(V, cfg), rel=1e-12, abs=1e-13)


def test_barrier_zeros():
    for gamma in (1.2, 1.6, 2.0):
        for z in np.linspace(z_min(gamma), z_max(gamma), 7):
            cfg = make_config(gamma, 2, z)
            V6 = sonic_points(gamma, z)[0].V
            assert abs(frak_B(V6, cfg, k_coeff(gamma, z))) < 1e-11
    for gamma in (1.8, 2.0, 2.3):
        z1 = z_one(gamma)
        V = -sonic_points(gamma, z1)[1].C ** 2
        for m in (1, 2):
            assert abs(frak_B(V, make_config(gamma, m, z1), 1.0)) < 1e-11
    for gamma in (2.0, 2.5, 3.0):
        zM = z_max(gamma)
        assert abs(frak_B_s(sonic_points(gamma, zM)[1].V, make_config(gamma, 1, zM))) < 1e-11
    assert frak_B_s(jump_state(2.5)[0].V, make_config(2.5, 1, 0.05)) > 0
    with pytest.raises(SingularityError):
        frak_B(-1.0, make_config(2.0, 1, 0.1), 1.0)
    with pytest.raises(SingularityError):
        frak_B_s(np.array([-0.5, -1.0]), make_config(2.0, 1, 0.1))


@pytest.mark.parametrize("gamma,m", [(1.2, 1), (1.5, 2), (2.0, 1), (2.0, 2)])
def test_delta_matches_quadrature(gamma, m):
    V1 = jump_state(gamma)[0].V
    for z in np.linspace(z_min(gamma), z_g(gamma, m), 5)[1:]:
        cfg = make_config(gamma, m, z)
        V6, C6 = sonic_points(gamma, z)[0][:2]

        def integrand(V):
            g1, _, f1, _, _ = fg_decomposition(cfg, V)
            return f1 / g1

        ref = -quad(integrand, V1, V6, epsabs=1e-13, epsrel=1e-13)[0] + math.log(C6)
        assert delta_bound(gamma, m, z) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("m", [1, 2])
def test_delta_properties(m):
    for gamma in (1.1, 1.5, 2.0):
        zs = np.linspace(z_min(gamma), z_g(gamma, m), 50)
        d = np.array([delta_bound(gamma, m, z) for z in zs])
        assert np.all(np.diff(d) > 0)
        assert d[-1] < math.log(jump_state(gamma)[0].C)
    with pytest.raises(DomainError):
        delta_bound(2.5, m, 0.1)
    with pytest.raises(DomainError):
        delta_bound(1.5, m, z_g(1.5, m) * 1.1)


@pytest.mark.parametrize("gamma,m", [(1.3, 1), (1.9, 2)])
def test_delta_above_computed_solution(gamma, m):
    rep = delta_ordering(gamma, m, n=6)
    assert rep.passed and rep.samples == 6


def test_c8_derivatives_finite_differences():
    for gamma in (1.4, 2.0, 3.0):
        for z in (0.02, 0.05, 0.5 * z_max(gamma)):
            C8 = lambda s: sonic_points(gamma, s)[1].C  # noqa: E731
            _, d1, d2 = c8_derivatives(gamma, z)
            h = 1e-6
            fd1 = (C8(z + h) - C8(z - h)) / (2 * h)
            h2 = 1e-4
            fd2 = (C8(z + h2) - 2 * C8(z) + C8(z - h2)) / h2**2
            assert fd1 == pytest.approx(d1, rel=1e-5)
            assert fd2 == pytest.approx(d2, rel=1e-5)


def test_c8_concavity():
    assert c8_concavity(2.0, 0.05) < 0
    zM = z_max(2.0)
    seq = [abs(c8_concavity(2.0, zM * (1 - 10.0**-k))) for k in range(1, 8)]
    assert all(b > a for a, b in zip(seq, seq[1:]))
    with pytest.raises(DomainError):
        c8_concavity(2.0, zM)


def test_slope_examples():
    rep = slope_inequalities(make_config(1.5, 1, z_max(1.5)), Branch.P6)
    assert rep.passed and rep.name == "SlopeP6"
    rep = slope_inequalities(make_config(2.0, 2, z_one(2.0)), Branch.P8)
    assert rep.passed and rep.params["equivalent_form"] > 0
    rep = slope_inequalities(make_config(3.0, 1, z_two(3.0)), Branch.P8)
    assert rep.passed and rep.params["equivalent_form"] > 0 and rep.params["kappa"] == 1.5
    with pytest.raises(DomainError):
        slope_inequalities(make_config(2.0, 2, 0.1), Branch.P8)
    with pytest.raises(DomainError):
        slope_inequalities(make_config(2.5, 2, 0.1), Branch.P6)


@pytest.mark.parametrize("gamma,m", [(1.4, 2), (2.5, 1), (3.0, 2), (1.1, 1)])
def test_trajectory_barriers(solve, gamma, m):
    res = solve(gamma, m)
    reports = check_trajectory_barriers(res.left_traj) + check_trajectory_barriers(res.right_traj)
    names = {r.name for r in reports}
    assert all(r.passed for r in reports), [r.to_dict() for r in reports if not r.passed]
    if gamma == 1.4:
        assert {"Bk", "BkM", "B1"} <= names
    if gamma == 2.5:
        assert "Bs" in names or "B32" in names


def test_polynomial_claims_listed():
    assert len(POLYNOMIAL_CLAIMS) == 10
    assert gamma_star() < 2


def test_suite_at_one_gamma():
    reps = barrier_suite(n_v=200, n_g=10, n_z=10, gamma=2.5, ms=(1,))
    assert reps and all(r.passed for r in reps)
    assert all(r.min_margin > 1e-12 for r in reps)
