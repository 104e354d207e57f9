"""
Local analytic solution through a sonic triple point.

At P6 or P8 both F and G vanish, so the ODE ``dC/dV = F/G`` is 0/0.  The
unique analytic solution leaving along the negative-slope direction is built
as a Taylor series ``C(V) = sum c_l (V - V*)**l``: the slope c1 is a root of
a quadratic, and every higher coefficient follows from a linear relation
``A_l c_l = B_l`` in the lower ones.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalAnomaly
from .model import GasConfig, PhasePoint, make_config, sonic_partials, sonic_points, z_min

DEFAULT_ORDER = 40
MAX_ORDER = 320


class Branch(str, enum.Enum):
    P6 = "P6"
    P8 = "P8"


@dataclass(frozen=True)
class SonicExpansion:
    cfg: GasConfig
    which: Branch
    star: PhasePoint
    c: tuple[float, ...]
    K_est: float
    radius_est: float
    N: int
    slope_discriminant: float

    @property
    def c1(self) -> float:
        return self.c[1]


def star_point(cfg: GasConfig, which: Branch | str) -> PhasePoint:
    P6, P8, _ = sonic_points(cfg.gamma, cfg.z)
    return P6 if Branch(which) is Branch.P6 else P8


def sonic_slopes(cfg: GasConfig, which: Branch | str) -> tuple[float, float, float]:
    """Both roots of the slope quadratic at the triple point and sqrt of its discriminant.

    The quadratic is ``-G_C c^2 + (F_C - G_V) c + F_V = 0``.  Since G_C < 0
    at both triple points the root taken with +R in the numerator is the
    negative one.
    """
    which = Branch(which)
    if which is Branch.P6 and cfg.z < z_min(cfg.gamma) * (1.0 - 1e-12):
        raise DomainError(f"P6 expansion needs z >= z_m, got z={cfg.z!r}")
    star = star_point(cfg, which)
    F_C, F_V, G_C, G_V = sonic_partials(cfg, star)
    disc = (F_C - G_V) ** 2 + 4.0 * F_V * G_C
    if disc < 0.0:
        if disc > -1e-14 * (F_C - G_V) ** 2:
            disc = 0.0
        else:
            raise DomainError(f"slope discriminant {disc!r} < 0 at {which.value}")
    R = math.sqrt(disc)
    c_neg = (F_C - G_V + R) / (2.0 * G_C)
    c_pos = (F_C - G_V - R) / (2.0 * G_C)
    return c_neg, c_pos, R


def _cube_coeffs(c: np.ndarray, upto: int) -> np.ndarray:
    """Coefficients 0..upto of (sum c_i v^i)^3."""
    sq = np.convolve(c, c)[: upto + 1]
    return np.convolve(sq, c)[: upto + 1]


def _get(c, n: int) -> float:
    return c[n] if 0 <= n < len(c) else 0.0


def recurrence_AB(cfg: GasConfig, which: Branch | str, coeffs, ell: int) -> tuple[float, float]:
    """A_l and B_l from c_0..c_{l-1}; the next coefficient is B_l / A_l."""
    if ell < 2:
        raise ValueError("recurrence starts at order 2")
    if len(coeffs) < ell:
        raise ValueError(f"need {ell} known coefficients, have {len(coeffs)}")
    V = star_point(cfg, which).V
    m, mz, lam = cfg.m, cfg.mz, cfg.lam
    a1, a2, a3 = cfg.a1, cfg.a2, cfg.a3
    u = 1.0 + V
    c = np.asarray(coeffs[:ell], dtype=float)
    c0, c1 = c[0], c[1]

    F_C, F_V, G_C, G_V = sonic_partials(cfg, (V, c0))
    A = c0 * (F_C - G_C * c1 - ell * (G_V + G_C * c1))

    # restricted triple sums: indices <= l-1 is the same as truncating the array
    cube = _cube_coeffs(c, ell + 1)
    s_hi, s_mid, s_lo = cube[ell + 1], cube[ell], cube[ell - 1]

    B = (
        u * ((m + 1) * V + 2.0 * mz) / 3.0 * (ell + 1) * s_hi
        - ((u + mz) - ((m + 1) * (1.0 + 2.0 * V) + 2.0 * mz) * ell / 3.0) * s_mid
        - (1.0 - (m + 1) * (ell - 1) / 3.0) * s_lo
        - (
            (6.0 * V * V + (3.0 * lam + 6.0) * V + 2.0 * lam + 1.0) * (ell - 1)
            - 3.0 * a1 * u * u
            + 2.0 * a2 * u
            - a3
        )
        * _get(c, ell - 1)
        - ((lam + 2.0 + 4.0 * V) * (ell - 2) - 3.0 * a1 * u + a2) * _get(c, ell - 2)
        - (ell - 3 - a1) * _get(c, ell - 3)
    )
    if abs(A) < 1e-12 * abs(c0) * ell:
        raise NumericalAnomaly(f"non-vanishing condition violated at order {ell}: A={A!r}")
    return A, B


def _fit_bounds(c: list[float]) -> tuple[float, float]:
    N = len(c) - 1
    K = 0.0
    for ell in range(2, N + 1):
        a = abs(c[ell])
        if a > 0.0:
            K = max(K, (a * ell**3) ** (1.0 / (ell - 1)))
    sup = 0.0
    for ell in range(N // 2, N):
        if c[ell] != 0.0:
            sup = max(sup, abs(c[ell + 1] / c[ell]))
    radius = 1.0 / sup if sup > 0.0 else 1.0
    return K, max(radius, 1e-6)


def expand(cfg: GasConfig, which: Branch | str, N: int = DEFAULT_ORDER) -> SonicExpansion:
    which = Branch(which)
    if N < 8:
        raise ValueError("truncation order must be at least 8")
    star = star_point(cfg, which)
    c1, _, R = sonic_slopes(cfg, which)
    c = [star.C, c1]
    for ell in range(2, N + 1):
        A, B = recurrence_AB(cfg, which, c, ell)
        cl = B / A
        if not math.isfinite(cl) or abs(cl) > 1e300:
            raise NumericalAnomaly(f"series coefficient overflow at order {ell}")
        c.append(cl)
    K, radius = _fit_bounds(c)
    return SonicExpansion(cfg, which, star, tuple(c), K, radius, N, R)


def handoff_offset(exp: SonicExpansion) -> float:
    """Distance from V* where the integrator takes over from the series."""
    P6, P8, _ = sonic_points(exp.cfg.gamma, exp.cfg.z)
    eps = min(exp.radius_est / 4.0, 1e-2)
    gap = P8.V - P6.V
    if gap > 0.0:
        eps = min(eps, gap / 8.0)
    return eps


def _horner(c, v: float) -> tuple[float, float]:
    val = 0.0
    der = 0.0
    for ck in reversed(c):
        der = der * v + val
        val = val * v + ck
    return val, der


def eval_expansion(exp: SonicExpansion, V: float, strict: bool = True) -> tuple[float, float]:
    v = V - exp.star.V
    if strict and abs(v) > exp.radius_est / 2.0:
        raise DomainError(f"|V - V*|={abs(v):.3g} beyond half the convergence radius {exp.radius_est:.3g}")
    return _horner(exp.c, v)


def converged_expansion(
    cfg: GasConfig, which: Branch | str, N: int = DEFAULT_ORDER, tol: float = 1e-11
) -> SonicExpansion:
    """Double the truncation order until the handoff values stop moving."""
    exp = expand(cfg, which, N)
    while True:
        eps = handoff_offset(exp)
        nxt = expand(cfg, which, 2 * exp.N) if 2 * exp.N <= MAX_ORDER else None
        if nxt is None:
            return exp
        worst = 0.0
        for V in (exp.star.V - eps, exp.star.V + eps):
            a = _horner(exp.c, V - exp.star.V)[0]
            b = _horner(nxt.c, V - nxt.star.V)[0]
            worst = max(worst, abs(a - b))
        if worst <= tol:
            return exp
        exp = nxt


def expansion_for(gamma: float, m: int, z: float, which: Branch | str, N: int = DEFAULT_ORDER) -> SonicExpansion:
    return converged_expansion(make_config(gamma, m, z), which, N)
