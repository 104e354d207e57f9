"""
Similarity profiles and physical fields from a converged shooting result.

Along the solution curve ``ln(-x)`` is strictly monotone in V, so V(x) is
recovered by inverting the integrator's dense output with a bracketed root
solve in ``s = ln(-V)``; the same parameter resolves both the shock side and
the geometric approach to the origin.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NumericalAnomaly
from .integrate import Trajectory
from .model import eval_D, eval_F, eval_G, jump_state
from .shooting import ShootResult

ENTROPY_DEGENERATE = 1e-6
CAUCHY_TOL = 1e-5
_EPS = 2.220446049250313e-16
MIN_GRID = 64


@dataclass(frozen=True)
class SimilarityProfile:
    result: ShootResult = field(repr=False)
    grid: np.ndarray
    V: np.ndarray
    C: np.ndarray
    R: np.ndarray
    R_mass: np.ndarray
    x_sonic: float
    entropy_const: float
    q: float
    x_min: float
    anchor_gap: float = 0.0

    @property
    def lam(self) -> float:
        return self.result.lambda_std

    @property
    def gamma(self) -> float:
        return self.result.gamma

    def entropy_invariant(self, R: np.ndarray | None = None) -> np.ndarray:
        """R^(q+1-gamma) (C/x)^2 (1+V)^q at each grid point."""
        R = self.R_mass if R is None else R
        return R ** (self.q + 1.0 - self.gamma) * (self.C / self.grid) ** 2 * (1.0 + self.V) ** self.q

    def state_at(self, x: float) -> tuple[float, float, float]:
        """(V, C, R) at x in [-1, -x_min], or the upstream state for x < -1."""
        if x < -1.0:
            return pre_shock_state()
        if not -1.0 <= x <= -self.x_min * (1.0 - 1e-12):
            raise DomainError(f"x={x!r} outside the sampled range [-1, {-self.x_min!r}]")
        V, C, lnR = _invert(self.result, math.log(-x))
        return V, C, _entropy_R(self.q, self.gamma, self.entropy_const, V, C, x, lnR)

    def metadata(self) -> dict[str, object]:
        r = self.result
        return {
            "gamma": r.gamma,
            "m": r.m,
            "z_std": r.z_std,
            "lambda": r.lambda_std,
            "triple_point": r.triple.value,
            "x_sonic": self.x_sonic,
            "entropy_const": self.entropy_const,
            "q": self.q,
            "x_min": self.x_min,
            "anchor_gap": self.anchor_gap,
            "n": int(self.grid.size),
        }


@dataclass(frozen=True)
class PhysicalState:
    u: float
    c: float
    rho: float
    p: float


def pre_shock_state() -> tuple[float, float, float]:
    """Quiescent upstream values of (V, C, R)."""
    return 0.0, 0.0, 1.0


# --- inversion of ln(-x)(V) -------------------------------------------------


def _branches(result: ShootResult) -> tuple[Trajectory, Trajectory]:
    if result.left_traj is None or result.right_traj is None:
        raise ValueError("profile needs a result with both trajectories attached")
    return result.left_traj, result.right_traj


def _check_monotone(traj: Trajectory) -> None:
    # ln(-x) falls from the shock to the sonic point and on toward the origin
    d = np.diff(traj.lnx)
    want = 1.0 if traj.side.value == "Left" else -1.0
    if np.any(d * want <= 0.0):
        raise NumericalAnomaly(f"ln(-x) is not monotone along the {traj.side.value.lower()} branch")


def _invert(result: ShootResult, L: float) -> tuple[float, float, float]:
    """(V, C, ln R) at ln(-x) = L."""
    left, right = _branches(result)
    L_star = float(left.lnx[0])
    traj = left if L >= L_star else right
    lnx = traj.lnx
    lo, hi = (float(lnx.min()), float(lnx.max()))
    if not lo - 1e-13 <= L <= hi + 1e-13:
        raise DomainError(f"ln(-x)={L!r} outside the trajectory range [{lo!r}, {hi!r}]")
    # bracket between neighbouring nodes, then refine on the dense output
    idx = np.searchsorted(-lnx if traj is right else lnx, -L if traj is right else L)
    i0, i1 = max(idx - 1, 0), min(idx, lnx.size - 1)
    a, b = math.log(-traj.V[i0]), math.log(-traj.V[i1])
    if a == b:
        V = float(traj.V[i0])
    else:
        def gap(s: float) -> float:
            return traj.evaluate(-math.exp(s))[1] - L

        ga, gb = gap(a), gap(b)
        if ga == 0.0:
            s = a
        elif gb == 0.0:
            s = b
        else:
            if ga * gb > 0.0:
                raise NumericalAnomaly(f"lost the bracket inverting ln(-x)={L!r}")
            s = brentq(gap, a, b, xtol=1e-15, rtol=4.0 * np.finfo(float).eps)
        V = -math.exp(s)
    C, _, lnR = traj.evaluate(V)
    return V, C, lnR


def _entropy_R(q: float, gamma: float, K: float, V: float, C: float, x: float, lnR_mass: float) -> float:
    """R from the entropy relation, or the mass-balance value when its exponent degenerates."""
    e = q + 1.0 - gamma
    if abs(e) < ENTROPY_DEGENERATE:
        return math.exp(lnR_mass)
    return (K / ((C / x) ** 2 * (1.0 + V) ** q)) ** (1.0 / e)


# --- construction -------------------------------------------------------------


def build_profile(result: ShootResult, x_min: float = 1e-4, n: int = 400) -> SimilarityProfile:
    """Sample V, C, R on a grid geometric in -x from 1 down to x_min."""
    if not 0.0 < x_min < 1.0:
        raise DomainError("x_min must lie in (0, 1)")
    if n < MIN_GRID:
        raise DomainError(f"n must be at least {MIN_GRID}")
    left, right = _branches(result)
    _check_monotone(left)
    _check_monotone(right)
    if float(right.lnx[-1]) > math.log(x_min):
        raise DomainError(f"x_min={x_min!r} is closer to the origin than the integrated solution reaches")
    cfg = left.cfg
    (V1, C1), R1 = jump_state(cfg.gamma)
    q = cfg.q
    K = R1 ** (q + 1.0 - cfg.gamma) * C1**2 * (1.0 + V1) ** q

    Ls = np.linspace(0.0, math.log(x_min), n)
    grid = -np.exp(Ls)
    grid[0] = -1.0
    V = np.empty(n)
    C = np.empty(n)
    Rm = np.empty(n)
    R = np.empty(n)
    for i, L in enumerate(Ls):
        V[i], C[i], lnR = _invert(result, float(L))
        Rm[i] = math.exp(lnR)
        R[i] = _entropy_R(q, cfg.gamma, K, V[i], C[i], grid[i], lnR)
    # the shock row is the jump state itself; the trajectory misses it by the shooting residual
    anchor_gap = float(C[0] - C1)
    V[0], C[0], R[0], Rm[0] = V1, C1, R1, R1
    return SimilarityProfile(
        result=result,
        grid=grid,
        V=V,
        C=C,
        R=R,
        R_mass=Rm,
        x_sonic=-math.exp(float(left.lnx[0])),
        entropy_const=K,
        q=q,
        x_min=x_min,
        anchor_gap=anchor_gap,
    )


# --- checks -----------------------------------------------------------------


def continuity_residual(profile: SimilarityProfile) -> np.ndarray:
    """(1+V) d lnR/d ln(-x) - ((m+1) V + G/D) / lam at interior grid points.

    d lnR/d ln(-x) is the derivative of the entropy-relation R along the flow,
    using dV/d ln(-x) = -G/(lam D) and dC/dV = F/G, so a zero residual means
    the entropy relation is a first integral of the mass balance.
    """
    cfg = profile.result.left_traj.cfg
    g, q, lam = cfg.gamma, cfg.q, cfg.lam
    e = q + 1.0 - g
    out = []
    for V, C in zip(profile.V[1:-1], profile.C[1:-1]):
        F, G, D = eval_F(cfg, V, C), eval_G(cfg, V, C), eval_D(V, C)
        dV = -G / (lam * D)
        dC = F / G * dV
        dlnR = (-2.0 * (dC / C - 1.0) - q * dV / (1.0 + V)) / e
        out.append((1.0 + V) * dlnR - ((cfg.m + 1) * V + G / D) / lam)
    return np.array(out)


def rh_check(profile: SimilarityProfile) -> dict[str, float]:
    """Jump-relation residuals at x = -1 against the upstream state, plus the Lax margin."""
    V0, C0, R0 = pre_shock_state()
    g = profile.gamma
    V1, C1, R1 = float(profile.V[0]), float(profile.C[0]), float(profile.R[0])
    return {
        "velocity": (1.0 + V1) - ((g - 1.0) / (g + 1.0) * (1.0 + V0) + 2.0 * C0**2 / ((g + 1.0) * (1.0 + V0))),
        "sound_speed": C1**2 - (C0**2 + (g - 1.0) / 2.0 * ((1.0 + V0) ** 2 - (1.0 + V1) ** 2)),
        "mass": R1 * (1.0 + V1) - R0 * (1.0 + V0),
        "lax_margin": (1.0 + V0) ** 2 - C0**2,
    }


def _limit_samples(profile: SimilarityProfile, h0: float, levels: int):
    out = []
    for k in range(levels):
        x = -h0 / 2**k
        V, C, R = profile.state_at(x)
        out.append((V / x, C / x, R))
    return np.array(out)


def _richardson(col: np.ndarray) -> float:
    """Repeated first-order Richardson on samples at h, h/2, h/4, ..."""
    T = [list([v]) for v in col]
    for j in range(1, len(col)):
        for k in range(j, len(col)):
            T[k].append(T[k][j - 1] + (T[k][j - 1] - T[k - 1][j - 1]) / (2**j - 1))
    return T[-1][-1]


def collapse_limits(profile: SimilarityProfile, levels: int = 4) -> dict[str, object]:
    """Limits of V/x, C/x and R as x -> 0-, with a Cauchy test on the extrapolants.

    Samples are taken at x_min 2^k for k = levels+1 .. 0; the extrapolant from
    each run of ``levels`` consecutive halvings must agree with the next to
    CAUCHY_TOL relative.
    """
    if profile.x_min > 1e-4:
        raise DomainError("collapse limits need the profile sampled to x_min <= 1e-4")
    h_top = profile.x_min * 2 ** (levels + 1)
    samples = _limit_samples(profile, h_top, levels + 2)
    ests = []
    for start in range(3):
        block = samples[start : start + levels]
        ests.append([_richardson(block[:, j]) for j in range(3)])
    ests = np.array(ests)
    rel = np.abs(np.diff(ests, axis=0)) / np.maximum(np.abs(ests[1:]), 1e-300)
    worst = float(rel.max())
    if not np.all(np.isfinite(ests)) or worst >= CAUCHY_TOL:
        raise NumericalAnomaly(f"collapse limits not Cauchy: relative change {worst:.3e}")
    V_x, C_x, R0 = ests[-1]
    lam = profile.lam
    return {
        "V_over_x": float(V_x),
        "C_over_x": float(C_x),
        "R0": float(R0),
        # u(0, r) = uhat r^(1-lam), c(0, r) = chat r^(1-lam)
        "uhat": float(-V_x / lam),
        "chat": float(-C_x / lam),
        "cauchy_rel_change": worst,
        "extrapolation": f"first-order Richardson, {levels} levels",
    }


# --- physical fields --------------------------------------------------------


def physical_state(profile: SimilarityProfile, t: float, r: float) -> PhysicalState:
    """u, c, rho and p at time t < 0 and radius r > 0."""
    if not t < 0.0:
        raise DomainError("fields are defined before collapse only (t < 0)")
    if not r > 0.0:
        raise DomainError("radius must be positive")
    lam = profile.lam
    x = t / r**lam
    if abs(x + 1.0) <= 8.0 * _EPS:
        x = -1.0  # on the shock path itself, rounded; the shock row is post-shock
    V, C, R = profile.state_at(x)
    scale = -r / (lam * t)
    c = scale * C
    return PhysicalState(u=scale * V, c=c, rho=R, p=R * c * c / profile.gamma)


def shock_radius(profile: SimilarityProfile, t: float) -> float:
    if not t < 0.0:
        raise DomainError("the shock path is defined for t < 0")
    return (-t) ** (1.0 / profile.lam)


# --- export -----------------------------------------------------------------


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def profile_csv(profile: SimilarityProfile) -> str:
    lam = profile.lam
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["x", "V", "C", "R", "u_coeff", "c_coeff"])
    for x, V, C, R in zip(profile.grid, profile.V, profile.C, profile.R):
        w.writerow([_fmt(x), _fmt(V), _fmt(C), _fmt(R), _fmt(-V / (lam * x)), _fmt(-C / (lam * x))])
    return buf.getvalue()
