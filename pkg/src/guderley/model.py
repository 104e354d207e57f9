"""
Closed-form layer of the similarity phase plane.

The self-similar reduction of the radially symmetric Euler equations leads to
the autonomous ODE ``dC/dV = F(V, C) / G(V, C)`` with the sonic factor
``D(V, C) = (1 + V)**2 - C**2``.  This module evaluates F, G, D and their
partial derivatives, the stationary points of the system, and every
parameter threshold used to decide which sonic point a solution crosses.

Everything here is a pure function of immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from scipy.optimize import bisect

from .errors import DomainError, SingularityError

GAMMA_1 = 1.0 + math.sqrt(2.0)

_POLE_TOL = 1e-14
_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class GasConfig:
    gamma: float
    m: int
    z: float
    lam: float
    a1: float
    a2: float
    a3: float
    q: float

    @property
    def mz(self) -> float:
        return self.m * self.z


class PhasePoint(NamedTuple):
    V: float
    C: float


@dataclass(frozen=True)
class CriticalPoints:
    P0: PhasePoint
    P1: PhasePoint
    P2: PhasePoint
    P3: PhasePoint
    P4: PhasePoint
    P5: PhasePoint
    P6: PhasePoint
    P7: PhasePoint
    P8: PhasePoint
    P9: PhasePoint
    w: float
    R1: float


@dataclass(frozen=True)
class ParameterWindows:
    gamma: float
    m: int
    z_M: float
    z_m: float
    z_g: float | None
    z_1: float | None
    z_2: float | None
    gamma_star: float
    gamma_1: float


def check_gamma(gamma: float) -> None:
    if not (isinstance(gamma, (int, float)) and math.isfinite(gamma)):
        raise DomainError(f"gamma must be a finite real, got {gamma!r}")
    if not 1.0 < gamma <= 3.0:
        raise DomainError(f"gamma={gamma!r} outside (1, 3]")


def check_m(m: int) -> None:
    if m not in (1, 2):
        raise DomainError(f"m={m!r} must be 1 (cylindrical) or 2 (spherical)")


def z_max(gamma: float) -> float:
    """Largest z for which the two sonic triple points are real."""
    return 1.0 / (gamma + 2.0 + 2.0 * math.sqrt(2.0 * gamma))


def z_from_lambda(lam: float, gamma: float, m: int) -> float:
    return (lam - 1.0) / (m * gamma)


def lambda_from_z(z: float, gamma: float, m: int) -> float:
    return m * gamma * z + 1.0


def make_config(gamma: float, m: int, z: float) -> GasConfig:
    check_gamma(gamma)
    check_m(m)
    if not math.isfinite(z) or z <= 0.0:
        raise DomainError(f"z={z!r} must be positive")
    zM = z_max(gamma)
    if z > zM:
        # a z_M computed by another rounding path may land a few ulps above
        if z > zM * (1.0 + 4.0 * _EPS):
            raise DomainError(f"z={z!r} exceeds z_M(gamma)={zM!r}")
        z = zM
    g = gamma
    mz = m * z
    return GasConfig(
        gamma=g,
        m=m,
        z=z,
        lam=lambda_from_z(z, g, m),
        a1=1.0 + m * (g - 1.0) / 2.0,
        a2=(m * (g - 1.0) + mz * g * (g - 3.0)) / 2.0,
        a3=mz * g * (g - 1.0) / 2.0,
        q=2.0 * m * g * z / (m + 1),
    )


def _check_pole(V: float) -> None:
    if abs(1.0 + V) < _POLE_TOL:
        raise SingularityError(f"V={V!r} is at the pole V=-1")


def eval_D(V: float, C: float) -> float:
    return (1.0 + V) ** 2 - C * C


def eval_G(cfg: GasConfig, V: float, C: float) -> float:
    return C * C * ((cfg.m + 1) * V + 2.0 * cfg.mz) - V * (1.0 + V) * (cfg.lam + V)


def eval_F(cfg: GasConfig, V: float, C: float) -> float:
    _check_pole(V)
    u = 1.0 + V
    return C * (C * C * (1.0 + cfg.mz / u) - cfg.a1 * u * u + cfg.a2 * u - cfg.a3)


def eval_FGD(cfg: GasConfig, p: PhasePoint | tuple[float, float]) -> tuple[float, float, float]:
    V, C = p
    return eval_F(cfg, V, C), eval_G(cfg, V, C), eval_D(V, C)


class Partials(NamedTuple):
    F_C: float
    F_V: float
    G_C: float
    G_V: float


def eval_partials(cfg: GasConfig, p: PhasePoint | tuple[float, float]) -> Partials:
    V, C = p
    _check_pole(V)
    u = 1.0 + V
    mz = cfg.mz
    G_C = 2.0 * C * ((cfg.m + 1) * V + 2.0 * mz)
    G_V = (cfg.m + 1) * C * C - 3.0 * V * V - 2.0 * (cfg.lam + 1.0) * V - cfg.lam
    F_C = 3.0 * C * C * (1.0 + mz / u) - cfg.a1 * u * u + cfg.a2 * u - cfg.a3
    F_V = C * (-mz * C * C / (u * u) - 2.0 * cfg.a1 * u + cfg.a2)
    return Partials(F_C, F_V, G_C, G_V)


def sonic_partials(cfg: GasConfig, p: PhasePoint | tuple[float, float]) -> Partials:
    """Partials at a triple point using the forms simplified by C = 1 + V and F = 0."""
    V, C = p
    F_C = 2.0 * C * (C + (cfg.lam - 1.0) / cfg.gamma)
    G_C = 2.0 * V * (cfg.lam + V)
    F_V = C * (-cfg.mz - 2.0 * cfg.a1 * (1.0 + V) + cfg.a2)
    G_V = (cfg.m + 1) * C * C - 3.0 * V * V - 2.0 * (cfg.lam + 1.0) * V - cfg.lam
    return Partials(F_C, F_V, G_C, G_V)


def sonic_F_V_forms(cfg: GasConfig, p: PhasePoint | tuple[float, float]) -> tuple[float, float, float]:
    """Three algebraically equivalent expressions for F_V at a triple point."""
    V, C = p
    u = 1.0 + V
    a1, a2, a3 = cfg.a1, cfg.a2, cfg.a3
    return (
        C * (-cfg.mz - 2.0 * a1 * u + a2),
        -cfg.mz * C - 2.0 * a1 * u * u + a2 * u,
        C * C - 3.0 * a1 * u * u + 2.0 * a2 * u - a3,
    )


def jump_state(gamma: float) -> tuple[PhasePoint, float]:
    """State immediately behind the shock at x = -1 for a quiescent upstream."""
    check_gamma(gamma)
    V1 = -2.0 / (gamma + 1.0)
    C1 = math.sqrt(2.0 * gamma * (gamma - 1.0)) / (gamma + 1.0)
    return PhasePoint(V1, C1), (gamma + 1.0) / (gamma - 1.0)


def w_of_z(gamma: float, z: float) -> float:
    """sqrt(1 - 2(gamma+2) z + (gamma-2)^2 z^2), evaluated in factored form.

    The radicand equals (1 - z (sqrt g + sqrt 2)^2)(1 - z (sqrt g - sqrt 2)^2);
    the first factor carries the zero at z_M without cancellation.
    """
    sg, s2 = math.sqrt(gamma), math.sqrt(2.0)
    near = 1.0 - z * (sg + s2) ** 2
    far = 1.0 - z * (sg - s2) ** 2
    if abs(near) <= 8.0 * _EPS:
        # z is z_M up to the rounding of z_M itself
        return 0.0
    if near < 0.0:
        raise DomainError(f"negative radicand: z={z!r} beyond z_M")
    return math.sqrt(near * far)


def sonic_points(gamma: float, z: float) -> tuple[PhasePoint, PhasePoint, float]:
    """(P6, P8, w).  Both points lie on the sonic line C = 1 + V."""
    w = w_of_z(gamma, z)
    base = -1.0 + (gamma - 2.0) * z
    V6 = (base - w) / 2.0
    V8 = (base + w) / 2.0
    return PhasePoint(V6, 1.0 + V6), PhasePoint(V8, 1.0 + V8), w


def H_of_V(cfg: GasConfig, V: float) -> float:
    den = (cfg.m + 1) * V + 2.0 * cfg.mz
    num = V * (1.0 + V) * (cfg.lam + V)
    if den == 0.0:
        return math.nan
    r = num / den
    return math.sqrt(r) if r >= 0.0 else math.nan


def V4_of(cfg: GasConfig) -> float:
    g = cfg.gamma
    return -2.0 * cfg.lam / (g + 1.0 + cfg.m * (g - 1.0))


def critical_points(cfg: GasConfig) -> CriticalPoints:
    P6, P8, w = sonic_points(cfg.gamma, cfg.z)
    P1, R1 = jump_state(cfg.gamma)
    V4 = V4_of(cfg)
    H4 = H_of_V(cfg, V4)
    return CriticalPoints(
        P0=PhasePoint(0.0, 0.0),
        P1=P1,
        P2=PhasePoint(-1.0, 0.0),
        P3=PhasePoint(-cfg.lam, 0.0),
        P4=PhasePoint(V4, H4),
        P5=PhasePoint(V4, -H4),
        P6=P6,
        P7=PhasePoint(P6.V, -P6.C),
        P8=P8,
        P9=PhasePoint(P8.V, -P8.C),
        w=w,
        R1=R1,
    )


def is_critical(cfg: GasConfig, p: PhasePoint, tol: float = 1e-12) -> bool:
    F, G, D = eval_FGD(cfg, p)
    scale = max(1.0, abs(p.V), abs(p.C)) ** 3
    return max(abs(F), abs(G), abs(D)) <= tol * scale


# --- thresholds -------------------------------------------------------------


def z_min(gamma: float) -> float:
    """z at which V6 coincides with the post-shock velocity V1."""
    return (gamma - 1.0) / ((2.0 * gamma - 1.0) * (gamma + 1.0))


def z_g(gamma: float, m: int) -> float:
    """z at which the double point P4 merges with P6 (defined here for gamma <= 2)."""
    g = gamma
    if m == 1:
        return (math.sqrt(g * g + (g - 1.0) ** 2) - g) / (g * (g - 1.0))
    b = 2.0 * g * g - g + 1.0
    a = 4.0 * g * (g - 1.0) + 8.0 / 3.0
    return (math.sqrt(b * b + 2.0 * g * (g - 1.0) * a) - b) / (g * a)


def z_one(gamma: float) -> float:
    """z with V8 = (sqrt5-3)/2, the zero of the unit-coefficient barrier at P8."""
    s5 = math.sqrt(5.0)
    return (s5 - 1.0) / (2.0 * (1.0 + s5 + gamma))


def z_two(gamma: float) -> float:
    """z with V8 = (sqrt33-7)/4, the zero of the 3/2-coefficient barrier at P8."""
    s33 = math.sqrt(33.0)
    return (s33 - 3.0) / (6.0 + 2.0 * s33 + 4.0 * gamma)


def z_tilde_m(gamma: float) -> float:
    """z with C8 = sqrt(2 - sqrt2) = C1(1 + sqrt2)."""
    r = math.sqrt(1.0 + math.sqrt(2.0))
    num = -(2.0 ** 0.25) * r + 2.0 ** 0.75 * r
    return num / (2.0 * math.sqrt(2.0) + 2.0 ** 1.25 * r + gamma)


def z_hat_m(gamma: float) -> float:
    """z with C8 = sqrt3/2 = C1(3)."""
    s3 = math.sqrt(3.0)
    return s3 / (12.0 + 8.0 * s3 + 2.0 * gamma)


def k_coeff(gamma: float, z: float) -> float:
    """Coefficient k with sqrt(-k V) passing through P6."""
    V6 = sonic_points(gamma, z)[0].V
    return -((1.0 + V6) ** 2) / V6


def k_at_zmax(gamma: float) -> float:
    return gamma / (2.0 + math.sqrt(2.0 * gamma))


def _gamma_star_residual(g: float) -> float:
    (V1, C1), _ = jump_state(g)
    return C1 - math.sqrt(-k_at_zmax(g) * V1)


@lru_cache(maxsize=1)
def gamma_star() -> float:
    """Adiabatic index where P1 lies on the curve sqrt(-k(gamma, z_M) V)."""
    return bisect(_gamma_star_residual, 1.6, 1.8, xtol=1e-13, maxiter=200)


def parameter_windows(gamma: float, m: int) -> ParameterWindows:
    check_gamma(gamma)
    check_m(m)
    gs = gamma_star()
    return ParameterWindows(
        gamma=gamma,
        m=m,
        z_M=z_max(gamma),
        z_m=z_min(gamma),
        z_g=z_g(gamma, m) if gamma <= 2.0 else None,
        z_1=z_one(gamma) if gs < gamma <= GAMMA_1 else None,
        z_2=z_two(gamma) if gamma > GAMMA_1 else None,
        gamma_star=gs,
        gamma_1=GAMMA_1,
    )


class FGDecomposition(NamedTuple):
    g1: float
    g2: float
    f1: float
    f2: float
    q: float


def fg_decomposition(cfg: GasConfig, V: float) -> FGDecomposition:
    """Split G = C^2 g1 - g2 and F = C (C^2 f1 - f2); q = g1 f2 - f1 g2."""
    _check_pole(V)
    u = 1.0 + V
    g1 = (cfg.m + 1) * V + 2.0 * cfg.mz
    g2 = V * u * (cfg.lam + V)
    f1 = 1.0 + cfg.mz / u
    f2 = cfg.a1 * u * u - cfg.a2 * u + cfg.a3
    return FGDecomposition(g1, g2, f1, f2, g1 * f2 - f1 * g2)


def q_factored(cfg: GasConfig, V: float) -> float:
    """Factored form of q(V) through its three real roots V4, V6, V8."""
    P6, P8, _ = sonic_points(cfg.gamma, cfg.z)
    lead = cfg.m * ((cfg.m + 1) * (cfg.gamma - 1.0) + 2.0) / 2.0
    return lead * (V - V4_of(cfg)) * (V - P6.V) * (V - P8.V)
