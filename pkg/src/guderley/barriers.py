"""
Barrier functions and the sign claims behind them.

A curve ``C = B(V)`` confines a solution of ``dC/dV = F/G`` when F - B'G has
a fixed sign along it.  For ``B = sqrt(-k V)`` that expression is a positive
multiple of a rational function of V alone (``frak_B``); for the line
``B = -sqrt(gamma/2) V`` it reduces to ``frak_B_s``.  Every inequality here
is checked by sampling, so a report is a falsification test with a recorded
margin, not a proof.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, SingularityError
from .integrate import Side, Trajectory
from .model import (
    GAMMA_1,
    GasConfig,
    check_gamma,
    check_m,
    gamma_star,
    jump_state,
    k_at_zmax,
    k_coeff,
    make_config,
    sonic_partials,
    sonic_points,
    w_of_z,
    z_g,
    z_hat_m,
    z_max,
    z_min,
    z_one,
    z_two,
)
from .series import Branch, sonic_slopes

MARGIN_FLOOR = 1e-12
OPEN_TRIM = 1e-9
# sampled claims vanish linearly at open V ends, so those are approached to 1e-6 of the span
V_TRIM = 1e-6


@dataclass
class BarrierReport:
    name: str
    domain: tuple[float, float]
    samples: int
    min_margin: float
    passed: bool
    params: dict[str, object] = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict[str, object]:
        d = asdict(self)
        d["domain"] = list(self.domain)
        return d


def _report(name, domain, margins, params=None, note="") -> BarrierReport:
    margins = np.asarray(margins, dtype=float).ravel()
    if margins.size == 0:
        return BarrierReport(name, tuple(domain), 0, math.nan, False, params or {}, "empty domain")
    lo = float(np.min(margins))
    ok = bool(np.all(np.isfinite(margins))) and lo > MARGIN_FLOOR
    return BarrierReport(name, (float(domain[0]), float(domain[1])), int(margins.size), lo, ok, params or {}, note)


# --- barrier polynomials ----------------------------------------------------


def frak_B(V, cfg: GasConfig, kappa: float):
    """Sign function of the barrier sqrt(-kappa V); vectorizes over V."""
    V = np.asarray(V, dtype=float)
    if np.any(np.abs(1.0 + V) < 1e-14):
        raise SingularityError("frak_B is singular at V=-1")
    g, m, z = cfg.gamma, cfg.m, cfg.z
    out = (
        (m - 1 - m * g) * V * V
        + (-2.0 - m * (g - 1.0) + m * g * (g - 2.0) * z + (m - 1) * kappa) * V
        + 2.0 * m * kappa * z / (1.0 + V)
        - 1.0
        - m * g * z
    )
    return out if out.ndim else float(out)


def frak_B_s(V, cfg: GasConfig):
    """Sign function of the line barrier C = -sqrt(gamma/2) V."""
    V = np.asarray(V, dtype=float)
    if np.any(np.abs(1.0 + V) < 1e-14):
        raise SingularityError("frak_B_s is singular at V=-1")
    g, z = cfg.gamma, cfg.z
    out = (-g + 0.5) * V + z * g * V / (2.0 * (1.0 + V)) + (g * z - 1.0) * (g - 1.0) / 2.0 - z * g
    return out if out.ndim else float(out)


# --- delta bound ------------------------------------------------------------


def delta_bound(gamma: float, m: int, z: float) -> float:
    """Closed-form upper bound for log C(V1) on the P6 branch when z <= z_g."""
    check_gamma(gamma)
    check_m(m)
    if gamma > 2.0:
        raise DomainError("delta bound is defined for gamma <= 2")
    zm, zg = z_min(gamma), z_g(gamma, m)
    if not zm * (1 - 1e-12) <= z <= zg * (1 + 1e-12):
        raise DomainError(f"z={z!r} outside [z_m, z_g]=[{zm!r}, {zg!r}]")
    V1 = jump_state(gamma)[0].V
    V6 = sonic_points(gamma, z)[0].V
    mz = m * z
    den = 2.0 * mz - m - 1.0
    return (
        ((m * m - m) * z + (m + 1)) / (den * (m + 1)) * math.log(((m + 1) * V6 + 2 * mz) / ((m + 1) * V1 + 2 * mz))
        + mz / den * math.log((1.0 + V1) / (1.0 + V6))
        + math.log(1.0 + V6)
    )


def delta_ordering(gamma: float, m: int, n: int = 10) -> BarrierReport:
    """delta(V1; z) - log C(V1) along P6 trajectories for z sampled in (z_m, z_g]."""
    from .shooting import shoot_left  # deferred: shooting sits above this module

    zm, zg = z_min(gamma), z_g(gamma, m)
    margins, zs = [], []
    # V6(z_m) = V1, so the open end is approached to 1e-3 of the window
    for z in np.linspace(zm + 1e-3 * (zg - zm), zg, n):
        traj = shoot_left(gamma, m, float(z), Branch.P6)
        margins.append(delta_bound(gamma, m, float(z)) - math.log(float(traj.C[-1])))
        zs.append(float(z))
    return _report("Delta", (zm, zg), margins, {"gamma": gamma, "m": m, "z": zs})


# --- slope inequalities at the triple points --------------------------------


def slope_inequalities(cfg: GasConfig, which: Branch | str) -> BarrierReport:
    """Slope of the analytic solution against the barrier slope at the triple point."""
    which = Branch(which)
    g, z = cfg.gamma, cfg.z
    params = {"gamma": g, "m": cfg.m, "z": z}
    c1 = sonic_slopes(cfg, which)[0]
    if which is Branch.P6:
        if g > 2.0 or not z_g(g, cfg.m) * (1 - 1e-12) <= z <= z_max(g):
            raise DomainError("P6 slope inequality needs gamma <= 2 and z in [z_g, z_M]")
        V6 = sonic_points(g, z)[0].V
        bound = (1.0 + V6) / (2.0 * V6)
        return _report("SlopeP6", (z, z), [bound - c1], {**params, "c1": c1, "bound": bound})
    gs = gamma_star()
    if gs < g <= GAMMA_1 and math.isclose(z, z_one(g), rel_tol=1e-12):
        name, kappa = "SlopeZ1", 1.0
    elif g > GAMMA_1 and math.isclose(z, z_two(g), rel_tol=1e-12):
        name, kappa = "SlopeZ2", 1.5
    else:
        raise DomainError("P8 slope inequality is stated at z_1 (gamma_star, gamma_1] or z_2 (gamma_1, 3]")
    P8 = sonic_points(g, z)[1]
    F_C, F_V, G_C, G_V = sonic_partials(cfg, P8)
    bound = -0.5 * math.sqrt(kappa / -P8.V)
    equiv = -kappa * G_C / P8.V + 2.0 * kappa / P8.C * (F_C - G_V) - 4.0 * F_V
    rep = _report(name, (z, z), [bound - c1], {**params, "kappa": kappa, "c1": c1, "bound": bound, "equivalent_form": equiv})
    rep.passed = rep.passed and equiv > MARGIN_FLOOR
    return rep


# --- concavity of C8 ---------------------------------------------------------


def c8_derivatives(gamma: float, z: float) -> tuple[float, float, float]:
    """C8 and its first two z-derivatives in closed form."""
    w = w_of_z(gamma, z)
    if w == 0.0:
        raise DomainError("C8'' is singular at z = z_M")
    C8 = (1.0 + (gamma - 2.0) * z + w) / 2.0
    dw = (-(gamma + 2.0) + (gamma - 2.0) ** 2 * z) / w
    return C8, ((gamma - 2.0) + dw) / 2.0, -4.0 * gamma / w**3


def c8_concavity(gamma: float, z: float) -> float:
    """C8 C8'' + (C8')^2, i.e. half the second derivative of C8^2; negative."""
    check_gamma(gamma)
    if not 0.0 < z < z_max(gamma):
        raise DomainError("concavity is evaluated on (0, z_M)")
    C8, d1, d2 = c8_derivatives(gamma, z)
    return C8 * d2 + d1 * d1


# --- trajectory checks ------------------------------------------------------


def _window(traj: Trajectory, lo: float, hi: float, open_lo=True, open_hi=True, n: int = 400):
    """Trajectory nodes in the window plus ``n`` dense-output samples across it."""
    a = lo + (V_TRIM * (hi - lo) if open_lo else 0.0)
    b = hi - (V_TRIM * (hi - lo) if open_hi else 0.0)
    t_lo, t_hi = sorted((float(traj.V[0]), float(traj.V[-1])))
    a, b = max(a, t_lo), min(b, t_hi)
    sel = (traj.V >= a) & (traj.V <= b)
    V, C = traj.V[sel], traj.C[sel]
    if b > a:
        Vd = np.linspace(a, b, n)
        Cd = np.array([traj.evaluate(float(v))[0] for v in Vd])
        V, C = np.concatenate((V, Vd)), np.concatenate((C, Cd))
    return V, C


def check_trajectory_barriers(traj: Trajectory) -> list[BarrierReport]:
    """Compare a trajectory with every barrier that applies to its regime."""
    cfg = traj.cfg
    g, m, z = cfg.gamma, cfg.m, cfg.z
    which = traj.exp.which
    params = {"gamma": g, "m": m, "z": z, "triple": which.value, "side": traj.side.value}
    (V1, _), _ = jump_state(g)
    P6, P8, _ = sonic_points(g, z)
    gs = gamma_star()
    zM = z_max(g)
    out: list[BarrierReport] = []
    # endpoints where the barrier touches the solution by construction are trimmed
    trim_note = f"open ends trimmed by {V_TRIM:g} of the window"
    if traj.side is Side.LEFT:
        if which is Branch.P6 and g <= 2.0 and z_g(g, m) <= z <= zM:
            k = k_coeff(g, z)
            V, C = _window(traj, V1, P6.V, open_lo=False)
            out.append(_report("Bk", (V1, P6.V), C - np.sqrt(-k * V), {**params, "kappa": k}, trim_note))
        if g <= gs:
            kM = k_at_zmax(g)
            V, C = _window(traj, V1, P6.V, open_lo=False)
            out.append(_report("BkM", (V1, P6.V), np.sqrt(-kM * V) - C, {**params, "kappa": kM}, trim_note))
        if 2.0 <= g <= 3.0:
            hi = -math.sqrt(2.0 / g) * P8.C
            V, C = _window(traj, V1, hi)
            # the window is empty (the claim vacuous) once sqrt(2/gamma) C8 >= -V1
            if hi > V1:
                out.append(_report("Bs", (V1, hi), C + math.sqrt(g / 2.0) * V, params, trim_note))
    else:
        kappa = None
        if which is Branch.P6 and g <= 2.0 and z_g(g, m) < z <= zM:
            kappa, lo = 1.0, P6.V
        elif which is Branch.P8 and gs < g <= GAMMA_1 and z_one(g) < z <= zM:
            kappa, lo = 1.0, P8.V
        elif which is Branch.P8 and g > GAMMA_1 and z_two(g) < z <= zM:
            kappa, lo = 1.5, P8.V
        if kappa is not None:
            V, C = _window(traj, lo, 0.0, open_lo=False, open_hi=False)
            name = "B1" if kappa == 1.0 else "B32"
            out.append(_report(name, (lo, 0.0), np.sqrt(-kappa * V) - C, {**params, "kappa": kappa}, trim_note))
    return out


# --- sampled sign claims ----------------------------------------------------


def _grid(lo: float, hi: float, n: int, open_lo: bool, open_hi: bool, trim: float = OPEN_TRIM) -> np.ndarray:
    span = hi - lo
    a = lo + (trim * span if open_lo else 0.0)
    b = hi - (trim * span if open_hi else 0.0)
    if n == 1:
        return np.array([b])
    return np.linspace(a, b, n)


def _gammas(lo: float, hi: float, n: int, open_lo: bool = True) -> np.ndarray:
    """Gamma samples on (lo, hi] or [lo, hi]; an open end is approached to 1e-3 of the span."""
    if not open_lo:
        return np.linspace(lo, hi, n)
    return np.concatenate(([lo + 1e-3 * (hi - lo)], np.linspace(lo, hi, n + 1)[1:]))


def _claim_over(name, gammas, m, zrange, vrange, margin, n_z, n_v, note=""):
    """Minimum of ``margin(cfg, V)`` over a gamma x z x V lattice."""
    worst = math.inf
    count = 0
    at = {}
    for g in gammas:
        zlo, zhi, zol, zoh = zrange(g)
        if zhi <= zlo:
            continue
        for z in _grid(zlo, zhi, n_z, zol, zoh):
            z = min(float(z), z_max(g))
            cfg = make_config(float(g), m, z)
            vlo, vhi, vol, voh = vrange(cfg)
            # at z = z_m the P6 interval [V1, V6) collapses to a point
            if vhi - vlo <= 1e-12 * max(1.0, abs(vlo)):
                continue
            V = _grid(vlo, vhi, n_v, vol, voh, V_TRIM)
            mg = np.asarray(margin(cfg, V), dtype=float)
            count += mg.size
            lo = float(np.min(mg))
            if lo < worst:
                worst = lo
                at = {"gamma": float(g), "z": z, "V": float(V[int(np.argmin(mg))])}
    rep = _report(name, (float(gammas[0]), float(gammas[-1])), [worst], {"m": m, "worst_at": at}, note)
    rep.samples = count
    return rep


def _claims_for_m(m: int, n_v: int, n_g: int, n_z: int, gamma: float | None = None) -> list[BarrierReport]:
    """Sampled claims for one geometry; ``gamma`` restricts each to that single value."""
    gs = gamma_star()
    V1 = lambda g: jump_state(g)[0].V  # noqa: E731
    C6 = lambda cfg: sonic_points(cfg.gamma, cfg.z)[0].C  # noqa: E731
    C8 = lambda cfg: sonic_points(cfg.gamma, cfg.z)[1].C  # noqa: E731
    V6 = lambda cfg: sonic_points(cfg.gamma, cfg.z)[0].V  # noqa: E731

    def pick(lo: float, hi: float, open_lo: bool = True):
        if gamma is None:
            return _gammas(lo, hi, n_g, open_lo)
        inside = (lo < gamma if open_lo else lo <= gamma) and gamma <= hi
        return np.array([gamma]) if inside else None

    g12, g1s, g23 = pick(1.0, 2.0), pick(1.0, gs), pick(2.0, 3.0, open_lo=False)
    gs1, g13 = pick(gs, GAMMA_1), pick(GAMMA_1, 3.0)
    table = [
        ("Bk", g12,
         lambda g: (z_min(g), z_max(g), False, False),
         lambda c: (V1(c.gamma), V6(c), False, True),
         lambda c, V: frak_B(V, c, k_coeff(c.gamma, c.z)), ""),
        ("BkM", g1s,
         lambda g: (z_min(g), z_max(g), False, False),
         lambda c: (V1(c.gamma), V6(c), False, True),
         lambda c, V: frak_B(V, c, k_at_zmax(c.gamma)), ""),
        ("BkM-order", g1s,
         lambda g: (z_min(g), z_max(g), False, True),
         lambda c: (V1(c.gamma), V6(c), False, True),
         lambda c, V: frak_B(V, c, k_at_zmax(c.gamma)) - frak_B(V, c, k_coeff(c.gamma, c.z)),
         "equality at z = z_M excluded"),
        ("Bs", g23,
         lambda g: (0.0, z_max(g), True, False),
         lambda c: (V1(c.gamma), -math.sqrt(2.0 / c.gamma) * C8(c), False, True),
         lambda c, V: frak_B_s(V, c), ""),
        ("B1-right-P6", g12,
         lambda g: (z_g(g, m), z_max(g), True, False),
         lambda c: (-C6(c) ** 2, 0.0, True, True),
         lambda c, V: -frak_B(V, c, 1.0), ""),
        ("B1-right-P8", gs1,
         lambda g: (z_one(g), z_max(g), True, False),
         lambda c: (-C8(c) ** 2, 0.0, True, True),
         lambda c, V: -frak_B(V, c, 1.0), ""),
        ("B32-right", g13,
         lambda g: (z_two(g), z_max(g), True, False),
         lambda c: (-2.0 / 3.0 * C8(c) ** 2, 0.0, True, True),
         lambda c, V: -frak_B(V, c, 1.5), ""),
        # sampled from z_hat_m, which lies below z_tilde_m, so the narrower range is covered too
        ("B1-left-P8", gs1,
         lambda g: (z_hat_m(g), z_one(g), True, False),
         lambda c: (V1(c.gamma), -C8(c) ** 2, False, True),
         lambda c, V: frak_B(V, c, 1.0), ""),
        ("B32-left-P8", g13,
         lambda g: (z_hat_m(g), z_two(g), True, False),
         lambda c: (V1(c.gamma), -2.0 / 3.0 * C8(c) ** 2, False, True),
         lambda c, V: frak_B(V, c, 1.5), ""),
    ]
    out = [
        _claim_over(name, gg, m, zr, vr, mg, n_z, n_v, note)
        for name, gg, zr, vr, mg, note in table
        if gg is not None
    ]
    if g12 is not None:
        slope6 = [
            slope_inequalities(make_config(float(g), m, min(float(z), z_max(g))), Branch.P6).min_margin
            for g in g12
            for z in _grid(z_g(g, m), z_max(g), n_z, False, False)
        ]
        out.append(_report("SlopeP6", (float(g12[0]), float(g12[-1])), slope6, {"m": m}))
    for name, gg, zf in (("SlopeZ1", gs1, z_one), ("SlopeZ2", g13, z_two)):
        if gg is None:
            continue
        reps = [slope_inequalities(make_config(float(g), m, zf(g)), Branch.P8) for g in gg]
        margins = [min(r.min_margin, r.params["equivalent_form"]) for r in reps]
        out.append(_report(name, (float(gg[0]), float(gg[-1])), margins, {"m": m}))
    if g12 is not None:
        # ordering of the thresholds and the delta bound
        out.append(_report("zm<zg", (1.0, 2.0), [z_g(g, m) - z_min(g) for g in g12], {"m": m}))
        out.append(
            _report(
                "Delta-at-zg", (1.0, 2.0),
                [math.log(jump_state(g)[0].C) - delta_bound(g, m, z_g(g, m)) for g in g12], {"m": m},
            )
        )
        inc = []
        for g in g12[:: max(1, len(g12) // 10)]:
            zs = np.linspace(z_min(g), z_g(g, m), 50)
            d = [delta_bound(float(g), m, float(z)) for z in zs]
            inc.extend(np.diff(d))
        out.append(_report("Delta-increasing", (1.0, 2.0), inc, {"m": m, "z_points": 50}))
    return out


def exclusion_claims(n_g: int, n_z: int, gamma: float | None = None) -> list[BarrierReport]:
    gs = gamma_star()
    out = []
    g6 = _grid(1.0, gs, n_g, True, True) if gamma is None else ([gamma] if 1.0 < gamma < gs else [])
    if len(g6):
        marg6 = []
        for g in g6:
            kM = k_at_zmax(g)
            for z in _grid(z_min(g), z_max(g), n_z, False, True):
                P6, P8, _ = sonic_points(g, z)
                marg6.append(P8.C - math.sqrt(-kM * P6.V))
        out.append(_report("Exclusion-P6-only", (1.0, gs), marg6))
    # at gamma = 2 the sum vanishes identically, so strictness needs gamma > 2
    g8 = _gammas(2.0, 3.0, n_g) if gamma is None else ([gamma] if 2.0 < gamma <= 3.0 else [])
    if len(g8):
        marg8 = []
        for g in g8:
            for z in _grid(0.0, z_max(g), n_z, True, True):
                P6, P8, _ = sonic_points(g, z)
                marg8.append(-(P6.V + math.sqrt(2.0 / g) * P8.C))
        out.append(_report("Exclusion-P8-only", (2.0, 3.0), marg8, note="gamma = 2 excluded: V6 + C8 = 0 there"))
    if gamma is None or gamma == 2.0:
        tie = [abs(sonic_points(2.0, z)[0].V + sonic_points(2.0, z)[1].C)
               for z in _grid(0.0, z_max(2.0), n_z, True, True)]
        out.append(_report("Exclusion-P8-tie-at-2", (0.0, z_max(2.0)), [1e-11 - max(tie)], note="|V6 + C8| at gamma = 2"))
    conc = []
    for g in (_grid(1.0, 3.0, n_g, True, False) if gamma is None else [gamma]):
        for z in _grid(0.0, z_max(g), n_z, True, True):
            conc.append(-c8_concavity(float(g), float(z)))
    out.append(_report("C8Concavity", (1.0, 3.0), conc))
    return out


# polynomial sign claims used by the proofs: (name, f, interval, open ends, sign)
_S2 = math.sqrt(2.0)
POLYNOMIAL_CLAIMS = [
    ("cubic-delta-1", lambda g: -(g**3) - 7 * g**2 + 106 * g / 3 - 36, (1.0, 2.0), -1),
    ("quintic-delta-2", lambda g: 81 * (g - 1) * (g + 1) ** 4 - 8 * g * (3 * g - 1) ** 4, (1.0, 2.0), -1),
    (
        "left-P8-1",
        lambda g: 8 * (g - 2) ** 2 * g**2 / 625 + 2 * (1 - 2 * g) * g * (g + 1) / 25 + (1 - 2 * g) * (2 - g),
        ("star", GAMMA_1),
        -1,
    ),
    (
        "left-P8-2",
        lambda g: (3 * _S2 - 4) * g + 1 - _S2 + 2 / 25 * (-(2 - _S2) * g**2 + (3 - 2 * _S2) * g + 2 * _S2 + 2),
        ("star", GAMMA_1),
        1,
    ),
    (
        "left-P8-3",
        lambda g: 2 * (3 * _S2 - 4) * g + 3 - 3 * _S2 + 4 / 25 * (-(2 - _S2) * g**2 + (3 - 2 * _S2) * g + 2 * _S2 + 2),
        ("star", GAMMA_1),
        1,
    ),
    ("left-P8-large-1", lambda g: g**3 - 17 * g**2 + 40 * g - 14, (GAMMA_1, 3.0), -1),
    ("left-P8-large-2", lambda g: -(g**4) + 12 * g**3 - 36 * g**2 + 32 * g + 1, (GAMMA_1, 3.0), 1),
    ("slope-P6-1", lambda g: 2 * g**3 - 12 * g**2 + 23 * g - 11, (1.0, 2.0), 1),
    ("slope-P6-2", lambda g: -(g**4) + 12 * g**3 - 14 * g**2 + 24 * g - 9, (1.0, 2.0), 1),
    ("slope-P6-3", lambda g: -36 * g**4 + 114 * g**3 - 4 * g**2 - 83 * g + 15, (1.0, 2.0), 1),
]


def polynomial_claims(n: int = 10_000, gamma: float | None = None) -> list[BarrierReport]:
    out = []
    for name, f, (lo, hi), sign in POLYNOMIAL_CLAIMS:
        if lo == "star":
            lo = gamma_star()
        if gamma is None:
            gs = _grid(lo, hi, n, True, False)
        elif lo < gamma <= hi:
            gs = np.array([gamma])
        else:
            continue
        out.append(_report(name, (lo, hi), sign * f(gs), {"sign": sign}))
    return out


def barrier_suite(n_v: int = 1000, n_g: int = 40, n_z: int = 40, n_poly: int = 10_000,
                  gamma: float | None = None, ms: tuple[int, ...] = (1, 2)) -> list[BarrierReport]:
    """Every sampled sign claim, over gamma grids or at a single gamma; all should pass."""
    out: list[BarrierReport] = []
    for m in ms:
        out.extend(_claims_for_m(m, n_v, n_g, n_z, gamma))
    out.extend(exclusion_claims(max(n_g, 50), max(n_z, 50), gamma))
    out.extend(polynomial_claims(n_poly, gamma))
    return out
