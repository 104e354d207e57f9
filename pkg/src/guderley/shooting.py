"""
Shooting for the similarity parameter.

For a trial z the analytic solution leaving the triple point is integrated
left to V1; ``residual(z) = C(V1; z) - C1``.  A positive residual is an upper
solution and a negative one a lower solution.  The residual at z_M decides
which triple point carries the standard solution, and a sign change inside
that branch's window is located by a safeguarded secant iteration.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from scipy.optimize import bisect

from .errors import GuderleyError, NoBracket, NumericalAnomaly
from .integrate import ATOL, RTOL, Status, Trajectory, attach_x, propagate_left, propagate_right
from .model import (
    GAMMA_1,
    check_gamma,
    check_m,
    jump_state,
    make_config,
    parameter_windows,
    sonic_points,
    z_max,
)
from .series import Branch, converged_expansion, star_point

DEFAULT_TOL = 1e-11
OPEN_END = 1e-9


class PlanEntry(NamedTuple):
    which: Branch
    lo: float
    hi: float


@dataclass
class ShootResult:
    gamma: float
    m: int
    z_std: float
    lambda_std: float
    triple: Branch
    residual: float
    window: tuple[float, float]
    iterations: int
    tol: float
    rtol: float
    atol: float
    bracket_history: list[tuple[float, float]] = field(default_factory=list)
    left_traj: Trajectory | None = field(default=None, repr=False)
    right_traj: Trajectory | None = field(default=None, repr=False)

    def to_dict(self) -> dict[str, object]:
        return {
            "gamma": self.gamma,
            "m": self.m,
            "z_std": self.z_std,
            "lambda_std": self.lambda_std,
            "triple_point": self.triple.value,
            "residual": self.residual,
            "window": [self.window[0], self.window[1]],
            "iterations": self.iterations,
            "solver": {"tol": self.tol, "integrator_tols": {"rtol": self.rtol, "atol": self.atol}},
        }


def shoot_left(gamma: float, m: int, z: float, which: Branch | str,
               rtol: float = RTOL, atol: float = ATOL) -> Trajectory:
    exp = converged_expansion(make_config(gamma, m, z), which)
    traj = propagate_left(exp, rtol=rtol, atol=atol)
    if traj.status is not Status.REACHED:
        raise NumericalAnomaly(
            f"left trajectory from {Branch(which).value} at z={z!r} stopped early: {traj.status.value}"
        )
    return traj


def left_residual(gamma: float, m: int, z: float, which: Branch | str,
                  rtol: float = RTOL, atol: float = ATOL) -> float:
    """C(V1) - C1 along the analytic solution from the chosen triple point."""
    P1 = jump_state(gamma)[0]
    star = star_point(make_config(gamma, m, z), which)
    if abs(star.V - P1.V) <= 1e-12:
        # at z_m the sonic point sits on V1 and the trajectory has no length
        return star.C - P1.C
    traj = shoot_left(gamma, m, z, which, rtol, atol)
    return float(traj.C[-1]) - P1.C


def regime_window(gamma: float, m: int, which: Branch | str) -> tuple[float, float] | None:
    """Open-closed z interval in which the connection through ``which`` can occur."""
    w = parameter_windows(gamma, m)
    if Branch(which) is Branch.P6:
        return (w.z_g, w.z_M) if w.z_g is not None else None
    lo = w.z_1 if w.z_1 is not None else w.z_2
    return (lo, w.z_M) if lo is not None else None


def p8_upper_seed(gamma: float) -> float:
    """A z giving an upper solution at P8 by the sufficient test C8(z) >= C1.

    C8 decreases from 1 at z = 0, so the crossing with C1 is unique when it
    exists; otherwise every z up to z_M qualifies and z_M / 2 is returned.
    """
    C1 = jump_state(gamma)[0].C
    zM = z_max(gamma)

    def gap(z: float) -> float:
        return sonic_points(gamma, z)[1].C - C1

    if gap(zM) >= 0.0:
        return zM / 2.0
    return bisect(gap, 0.0, zM, xtol=1e-15)


def select_regime(gamma: float, m: int) -> list[PlanEntry]:
    check_gamma(gamma)
    check_m(m)
    w = parameter_windows(gamma, m)
    if gamma <= w.gamma_star:
        return [PlanEntry(Branch.P6, w.z_g, w.z_M)]
    if gamma < 2.0:
        return [PlanEntry(Branch.P6, w.z_g, w.z_M), PlanEntry(Branch.P8, w.z_1, w.z_M)]
    if gamma <= GAMMA_1:
        return [PlanEntry(Branch.P8, w.z_1, w.z_M)]
    return [PlanEntry(Branch.P8, w.z_2, w.z_M)]


def find_root(
    f: Callable[[float], float],
    a: float,
    fa: float,
    b: float,
    fb: float,
    ftol: float,
    maxiter: int = 200,
    history: list[tuple[float, float]] | None = None,
) -> tuple[float, float, int]:
    """Bracketed root by regula falsi with the Illinois weight and bisection fallback.

    Stops once |f| <= ftol or the bracket has shrunk to rounding level.
    Returns (x, f(x), iterations) with x the best iterate seen.
    """
    if fa * fb > 0.0:
        raise NoBracket("endpoints do not bracket a sign change", [(a, fa), (b, fb)])
    if fa == 0.0:
        return a, fa, 0
    if fb == 0.0:
        return b, fb, 0
    best = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    side = 0
    width = abs(b - a)
    for it in range(1, maxiter + 1):
        x = (a * fb - b * fa) / (fb - fa)
        # fall back to bisection when the secant point is poor or the bracket stalls
        if not (min(a, b) < x < max(a, b)) or it % 4 == 0 and abs(b - a) > 0.5 * width:
            x = 0.5 * (a + b)
        if it % 4 == 0:
            width = abs(b - a)
        fx = f(x)
        if history is not None:
            history.append((x, fx))
        if abs(fx) < abs(best[1]):
            best = (x, fx)
        if fx == 0.0 or abs(fx) <= ftol:
            return x, fx, it
        if fx * fb < 0.0:
            a, fa = b, fb
            b, fb = x, fx
            side = 0
        else:
            b, fb = x, fx
            if side == 1:
                fa *= 0.5
            side = 1
        if abs(b - a) <= 4.0 * 2.2e-16 * max(abs(a), abs(b)):
            return best[0], best[1], it
    return best[0], best[1], maxiter


def solve_branch(
    gamma: float,
    m: int,
    which: Branch | str,
    lo: float,
    hi: float,
    tol: float = DEFAULT_TOL,
    rtol: float = RTOL,
    atol: float = ATOL,
    r_hi: float | None = None,
    scan: int = 0,
) -> tuple[float, float, int, list[tuple[float, float]]]:
    """Root of the residual for one triple point inside (lo, hi].

    The open lower end is probed at ``lo (1 + 1e-9)``.  With ``scan > 0`` the
    window is first sampled to find an interior sign change if the endpoints
    agree in sign.
    """
    which = Branch(which)

    def f(z: float) -> float:
        return left_residual(gamma, m, z, which, rtol, atol)

    history: list[tuple[float, float]] = []
    z_hi = hi
    f_hi = f(z_hi) if r_hi is None else r_hi
    history.append((z_hi, f_hi))
    if abs(f_hi) <= tol:
        return z_hi, f_hi, 0, history
    z_lo = lo * (1.0 + OPEN_END)
    f_lo = f(z_lo)
    history.append((z_lo, f_lo))
    if f_lo * f_hi > 0.0 and scan > 0:
        pts = [(z_lo, f_lo)]
        for k in range(1, scan):
            z = z_lo + (z_hi - z_lo) * k / scan
            pts.append((z, f(z)))
        pts.append((z_hi, f_hi))
        history.extend(pts[1:-1])
        for (za, fa), (zb, fb) in zip(pts, pts[1:]):
            if fa * fb <= 0.0:
                z_lo, f_lo, z_hi, f_hi = za, fa, zb, fb
                break
    if f_lo * f_hi > 0.0:
        raise NoBracket(
            f"no sign change for {which.value} on ({lo!r}, {hi!r}] at gamma={gamma!r}, m={m}", history
        )
    z, r, it = find_root(f, z_lo, f_lo, z_hi, f_hi, ftol=tol, history=history)
    return z, r, it, history


def solve_zstd(
    gamma: float,
    m: int,
    tol: float = DEFAULT_TOL,
    rtol: float = RTOL,
    atol: float = ATOL,
    with_right: bool = True,
) -> ShootResult:
    """Locate z_std following the regime plan; the residual at z_M picks the branch."""
    if tol < 1e-12:
        raise ValueError("tol below 1e-12 is under the integrator noise floor")
    plan = select_regime(gamma, m)
    zM = z_max(gamma)
    r_M = left_residual(gamma, m, zM, plan[0].which, rtol, atol)
    failures = []
    for entry in plan:
        # at z_M both triple points coincide, so r_M serves every entry
        try:
            z, r, it, hist = solve_branch(gamma, m, entry.which, entry.lo, entry.hi, tol, rtol, atol, r_hi=r_M)
        except NoBracket as exc:
            failures.append(exc)
            continue
        left = attach_x(shoot_left(gamma, m, z, entry.which, rtol, atol), "shock")
        right = None
        if with_right:
            right = attach_x(propagate_right(left.exp, rtol=rtol, atol=atol), left)
        return ShootResult(
            gamma=gamma,
            m=m,
            z_std=z,
            lambda_std=m * gamma * z + 1.0,
            triple=entry.which,
            residual=r,
            window=(entry.lo, entry.hi),
            iterations=it,
            tol=tol,
            rtol=rtol,
            atol=atol,
            bracket_history=hist,
            left_traj=left,
            right_traj=right,
        )
    scan = [pt for exc in failures for pt in exc.scan]
    raise NoBracket(f"no branch brackets z_std at gamma={gamma!r}, m={m}", scan)


class ScanPoint(NamedTuple):
    z: float
    residual: float
    error: str | None


def scan_residual(
    gamma: float,
    m: int,
    which: Branch | str,
    n: int = 200,
    window: tuple[float, float] | None = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> list[ScanPoint]:
    """Uniform residual samples over the open-closed window (lo, hi]."""
    if n < 16:
        raise ValueError("scan needs at least 16 points")
    if window is None:
        window = regime_window(gamma, m, which)
        if window is None:
            raise ValueError(f"{Branch(which).value} has no window at gamma={gamma!r}")
    lo, hi = window
    out = []
    for k in range(1, n + 1):
        z = lo + (hi - lo) * k / n
        try:
            out.append(ScanPoint(z, left_residual(gamma, m, z, which, rtol, atol), None))
        except GuderleyError as exc:
            out.append(ScanPoint(z, math.nan, str(exc)))
    return out


def sign_changes(points: list[ScanPoint]) -> int:
    vals = [p.residual for p in points if not math.isnan(p.residual)]
    return sum(1 for a, b in zip(vals, vals[1:]) if a * b < 0.0 or (a != 0.0 and b == 0.0))


def sweep(
    gammas: list[float],
    m: int,
    tol: float = DEFAULT_TOL,
    rtol: float = RTOL,
    atol: float = ATOL,
    threads: int = 1,
) -> list[ShootResult | GuderleyError]:
    """solve_zstd over a gamma grid; failures are returned in place of results."""

    def one(g: float):
        try:
            return solve_zstd(g, m, tol, rtol, atol)
        except GuderleyError as exc:
            return exc

    if threads <= 1:
        return [one(g) for g in gammas]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, gammas))
