"""The ten acceptance criteria at their stated tolerances, one test each."""

from __future__ import annotations

import math
import time

import numpy as np
from conftest import ACCEPTANCE, SOLVED, solved
from oracles import brute_force_coefficients, richardson_limit

from guderley.barriers import barrier_suite, check_trajectory_barriers
from guderley.errors import NoBracket
from guderley.integrate import sonic_x_ratio
from guderley.model import (
    V4_of,
    critical_points,
    eval_D,
    eval_FGD,
    eval_G,
    gamma_star,
    jump_state,
    make_config,
    sonic_points,
    z_g,
    z_max,
    z_min,
)
from guderley.profile import build_profile, collapse_limits, rh_check
from guderley.series import Branch, converged_expansion, eval_expansion, expand
from guderley.shooting import (
    p8_upper_seed,
    regime_window,
    scan_residual,
    select_regime,
    sign_changes,
    solve_branch,
    solve_zstd,
)

GAMMAS = [round(1.1 + 0.1 * k, 10) for k in range(20)]
CASES = [(g, m) for g in GAMMAS for m in (1, 2)]


def record(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE[n] = line
    print(line)
    assert ok, line


def all_solutions():
    return [solved(g, m) for g, m in CASES]


def test_criterion_01_existence_sweep():
    failures, times = [], []
    for g, m in CASES:
        t0 = time.perf_counter()
        res = solve_zstd(g, m)
        times.append(time.perf_counter() - t0)
        SOLVED[(g, m)] = res
        lo, hi = regime_window(g, m, res.triple)
        if not (abs(res.residual) <= 1e-10 and lo < res.z_std <= hi):
            failures.append((g, m, res.triple.value, res.z_std, res.residual))
    total, worst = sum(times), max(times)
    ok = not failures and total < 30.0 and worst < 1.0
    record(1, ok, f"{len(CASES)} cases, {len(failures)} off-window or unconverged, "
                  f"total {total:.1f} s, slowest {worst:.2f} s")


def test_criterion_02_uniqueness():
    counts = {}
    for g in [1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7]:
        assert g <= gamma_star()
        for m in (1, 2):
            counts[(g, m)] = sign_changes(scan_residual(g, m, Branch.P6, n=200))
    bad = {k: v for k, v in counts.items() if v != 1}
    record(2, not bad, f"{len(counts)} scans of 200 points, exactly one sign change in "
                       f"{len(counts) - len(bad)}; exceptions {bad}")


def test_criterion_03_branch_exclusion():
    issues = []
    for g in [1.1, 1.2, 1.3, 1.4, 1.5, 1.6]:
        for m in (1, 2):
            zM = z_max(g)
            # below the seed C8(z) >= C1, so every z there is an upper solution for P8
            try:
                z, _, _, _ = solve_branch(g, m, Branch.P8, p8_upper_seed(g), zM, scan=40)
            except NoBracket:
                continue
            if abs(z - zM) > 1e-12:
                issues.append((g, m, z))
    for g in [round(2.0 + 0.1 * k, 10) for k in range(11)]:
        for m in (1, 2):
            if any(e.which is Branch.P6 for e in select_regime(g, m)) or solved(g, m).triple is not Branch.P8:
                issues.append((g, m, "P6"))
    record(3, not issues, f"P8 brackets nothing for gamma<=1.6 and P6 never used for gamma>=2; issues {issues}")


def test_criterion_04_degeneracy_identities():
    worst = [0.0, 0.0, 0.0]
    for g in np.linspace(1.0, 3.0, 101)[1:]:
        P6, P8, _ = sonic_points(g, z_max(g))
        worst[0] = max(worst[0], abs(P6.V - P8.V), abs(P6.C - P8.C))
        worst[1] = max(worst[1], abs(sonic_points(g, z_min(g))[0].V - jump_state(g)[0].V))
    for g in np.linspace(1.0, 2.0, 101)[1:]:
        for m in (1, 2):
            cfg = make_config(g, m, z_g(g, m))
            worst[2] = max(worst[2], abs(V4_of(cfg) - critical_points(cfg).P6.V))
    ok = worst[0] < 1e-12 and worst[1] < 1e-12 and worst[2] < 1e-10
    record(4, ok, f"|P6-P8| at z_M {worst[0]:.1e}, |V6(z_m)-V1| {worst[1]:.1e}, |V4-V6| at z_g {worst[2]:.1e}")


def test_criterion_05_series_validity():
    rng = np.random.default_rng(20240611)
    worst_coef = worst_ode = 0.0
    for _ in range(50):
        g = float(rng.uniform(1.05, 3.0))
        m = int(rng.integers(1, 3))
        which = "P6" if rng.random() < 0.5 else "P8"
        lo = z_min(g) if which == "P6" else 0.0
        z = float(lo + (z_max(g) - lo) * rng.uniform(0.02, 1.0))
        ref = brute_force_coefficients(g, m, z, which, 12)
        got = expand(make_config(g, m, z), which, 12).c
        for a, b in zip(got, ref):
            worst_coef = max(worst_coef, abs(a - b) / abs(b))
        exp = converged_expansion(make_config(g, m, z), which)
        for s in (-1, 1):
            V = exp.star.V + s * exp.radius_est / 4
            C, dC = eval_expansion(exp, V)
            F, G, _ = eval_FGD(exp.cfg, (V, C))
            worst_ode = max(worst_ode, abs(dC * G - F) / (1 + abs(F)))
    ok = worst_coef < 1e-10 and worst_ode < 1e-8
    record(5, ok, f"50 configs, worst coefficient rel error {worst_coef:.1e}, worst ODE residual {worst_ode:.1e}")


def test_criterion_06_sonic_smoothness():
    worst_lim = worst_join = 0.0
    for res in all_solutions():
        L, R = res.left_traj, res.right_traj
        V0 = L.exp.star.V
        lam = res.lambda_std
        target = -lam * sonic_x_ratio(L.exp)

        def ratio(traj, V):
            C = traj.evaluate(V)[0]
            return -lam * eval_D(V, C) / eval_G(traj.cfg, V, C)

        for traj, s in ((L, -1.0), (R, 1.0)):
            lim = richardson_limit(lambda h, t=traj, s=s: ratio(t, V0 + s * h), 1e-4)
            worst_lim = max(worst_lim, abs(lim - target))
        dl = richardson_limit(lambda h: (L.evaluate(V0)[1] - L.evaluate(V0 - h)[1]) / h, 1e-4)
        dr = richardson_limit(lambda h: (R.evaluate(V0 + h)[1] - R.evaluate(V0)[1]) / h, 1e-4)
        worst_join = max(worst_join, abs(dl - dr))
    ok = worst_lim < 1e-6 and worst_join < 1e-8
    record(6, ok, f"{len(CASES)} solutions, one-sided limit error {worst_lim:.1e}, ln(-x) slope jump {worst_join:.1e}")


def test_criterion_07_barrier_suite():
    reports = barrier_suite(n_v=1000)
    failed = [r.name for r in reports if not r.passed]
    traj_reports = 0
    for res in all_solutions():
        for traj in (res.left_traj, res.right_traj):
            for r in check_trajectory_barriers(traj):
                traj_reports += 1
                if not r.passed:
                    failed.append(f"{r.name}@gamma={res.gamma},m={res.m}")
    worst = min(r.min_margin for r in reports)
    record(7, not failed, f"{len(reports)} sign claims (smallest margin {worst:.1e}) and "
                          f"{traj_reports} trajectory checks; failed {failed}")


def test_criterion_08_profile_physics():
    worst_ent = worst_rh = worst_cauchy = 0.0
    confined = True
    for res in all_solutions():
        prof = build_profile(res, x_min=1e-4, n=400)
        inv = prof.entropy_invariant()
        worst_ent = max(worst_ent, float(np.ptp(inv) / abs(inv[0])))
        rh = rh_check(prof)
        worst_rh = max(worst_rh, abs(rh["velocity"]), abs(rh["sound_speed"]), abs(rh["mass"]))
        confined &= bool(np.all(prof.V < 0) and np.all(prof.C > 0)) and rh["lax_margin"] > 0
        a = collapse_limits(prof)
        b = collapse_limits(build_profile(res, x_min=5e-5, n=400))
        for key in ("V_over_x", "C_over_x"):
            worst_cauchy = max(worst_cauchy, abs(a[key] - b[key]) / abs(b[key]))
        worst_cauchy = max(worst_cauchy, a["cauchy_rel_change"], b["cauchy_rel_change"])
    ok = worst_ent < 1e-8 and worst_rh < 1e-12 and worst_cauchy < 1e-5 and confined
    record(8, ok, f"entropy spread {worst_ent:.1e}, RH residual {worst_rh:.1e}, "
                  f"collapse Cauchy change {worst_cauchy:.1e}, V<0<C {confined}")


def test_criterion_09_cross_integrator():
    diffs = {}
    for g in (1.4, 3.0):
        base = solved(g, 2)
        tight = solve_zstd(g, 2, tol=base.tol, rtol=base.rtol / 100, atol=base.atol / 100, with_right=False)
        diffs[g] = abs(tight.z_std - base.z_std)
    ok = all(d < 1e-8 for d in diffs.values())
    record(9, ok, "z_std shift under 100x tighter integrator tolerances: "
                  + ", ".join(f"gamma={g} m=2 {d:.1e}" for g, d in diffs.items()))


def test_criterion_10_monotonicity():
    bad = []
    g = np.linspace(1.0, 3.0, 101)[1:]
    P1 = [jump_state(x)[0] for x in g]
    if not (all(b.V > a.V for a, b in zip(P1, P1[1:])) and all(b.C > a.C for a, b in zip(P1, P1[1:]))):
        bad.append("P1")
    for gamma in (1.1, 1.4, 5 / 3, 2.0, 2.5, 3.0):
        zs = np.linspace(0.0, z_max(gamma), 101)[1:]
        pts = [sonic_points(gamma, z) for z in zs]
        pairs = list(zip(pts, pts[1:]))
        if not all(b[0].V > a[0].V and b[0].C > a[0].C for a, b in pairs):
            bad.append(f"P6@{gamma}")
        if not all(b[1].V < a[1].V and b[1].C < a[1].C for a, b in pairs):
            bad.append(f"P8@{gamma}")
        if not (all(b[2] < a[2] for a, b in pairs) and pts[-1][2] == 0.0):
            bad.append(f"w@{gamma}")
    record(10, not bad, f"100-point grids, violations {bad}")


def test_solutions_are_finite():
    assert all(math.isfinite(r.z_std) for r in all_solutions())
