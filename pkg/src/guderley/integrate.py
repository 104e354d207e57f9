"""
Propagation of the sonic-series solution across the phase plane.

Within ``eps`` of the triple point the Taylor series is the solution; outside
it an adaptive Runge-Kutta integrator carries three quantities along V:

* ``C(V)`` from ``dC/dV = F/G``,
* ``L = ln(-x)`` from ``dL/dV = -lam D/G``,
* ``ln R`` from the mass balance ``d lnR/dV = -((m+1) V D/G + 1) / (1+V)``.

Only L and ln R differences matter, so they are carried relative to their
value at the sonic point and anchored later.  Close to the origin the right
branch switches to ``s = ln(-V)`` and carries ``C/(-V)`` and ``L - s``, which
both have finite limits at P0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NumericalAnomaly
from .model import eval_D, eval_F, eval_G, eval_partials, jump_state
from .series import SonicExpansion, eval_expansion, handoff_offset

RTOL = 1e-10
ATOL = 1e-12
BLOWUP_C = 1e6
AXIS_C = 1e-12
S_SWITCH_V = -1e-4
STOP_V = -1e-10
MIN_NODES = 256
BAND_NODES = 17

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


class Side(str, enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"


class Status(str, enum.Enum):
    REACHED = "ReachedTarget"
    HIT_C_AXIS = "HitCAxis"
    HIT_V_AXIS = "HitVAxis"
    BLOWUP = "Blowup"
    STEP_FAILURE = "StepFailure"


@dataclass(frozen=True)
class Trajectory:
    """Samples of one half of the solution curve, ordered away from the sonic point."""

    side: Side
    V: np.ndarray
    C: np.ndarray
    lnx: np.ndarray
    lnR: np.ndarray
    dCdV: np.ndarray
    exp: SonicExpansion
    status: Status
    eps: float
    rtol: float
    atol: float
    guarded: bool = True
    lnx_shift: float = 0.0
    lnR_shift: float = 0.0
    _segments: tuple = field(default=(), repr=False, compare=False)

    @property
    def cfg(self):
        return self.exp.cfg

    @property
    def end(self) -> tuple[float, float]:
        return float(self.V[-1]), float(self.C[-1])

    def covers(self, V: float) -> bool:
        lo, hi = sorted((float(self.V[0]), float(self.V[-1])))
        return lo <= V <= hi

    def evaluate(self, V: float) -> tuple[float, float, float]:
        """(C, ln(-x), ln R) at V from the series or the dense integrator output."""
        V_star = self.exp.star.V
        if abs(V - V_star) <= self.eps:
            C, lnx, lnR = _band_state(self.exp, V)
        else:
            C = lnx = lnR = math.nan
            for seg in self._segments:
                got = seg(V)
                if got is not None:
                    C, lnx, lnR = got
                    break
            if math.isnan(C):
                raise ValueError(f"V={V!r} outside the trajectory")
        return C, lnx + self.lnx_shift, lnR + self.lnR_shift


# --- the band around the sonic point --------------------------------------


def _dg_series(exp: SonicExpansion) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of D(V, C(V))/v and G(V, C(V))/v in v = V - V*.

    Both D and G vanish at the triple point; dividing the series by v
    exactly avoids the 0/0 cancellation of a pointwise quotient.
    """
    cfg = exp.cfg
    c = np.asarray(exp.c)
    V = exp.star.V
    n = len(c)
    C2 = np.convolve(c, c)[:n]
    u = np.zeros(n)
    u[0], u[1] = 1.0 + V, 1.0
    Dser = np.convolve(u, u)[:n] - C2
    lin = np.zeros(n)
    lin[0], lin[1] = (cfg.m + 1) * V + 2.0 * cfg.mz, cfg.m + 1
    cub = np.zeros(n)
    # V (1+V) (lam+V) expanded about V*
    p = np.convolve(np.convolve([V, 1.0], [1.0 + V, 1.0]), [cfg.lam + V, 1.0])
    cub[: len(p)] = p
    Gser = np.convolve(C2, lin)[:n] - cub
    return Dser[1:], Gser[1:]


def _poly(coef: np.ndarray, v: float) -> float:
    out = 0.0
    for a in coef[::-1]:
        out = out * v + a
    return out


def _band_slopes(exp: SonicExpansion, v: float, dg=None) -> tuple[float, float]:
    """(dL/dV, d lnR/dV) at V* + v inside the band."""
    d, g = dg if dg is not None else _dg_series(exp)
    ratio = _poly(d, v) / _poly(g, v)
    V = exp.star.V + v
    cfg = exp.cfg
    return -cfg.lam * ratio, -((cfg.m + 1) * V * ratio + 1.0) / (1.0 + V)


def _band_state(exp: SonicExpansion, V: float) -> tuple[float, float, float]:
    v = V - exp.star.V
    C = eval_expansion(exp, V, strict=False)[0]
    if v == 0.0:
        return C, 0.0, 0.0
    dg = _dg_series(exp)
    nodes = 0.5 * v * (_GL_X + 1.0)
    L = R = 0.0
    for t, wgt in zip(nodes, _GL_W):
        a, b = _band_slopes(exp, t, dg)
        L += wgt * a
        R += wgt * b
    return C, 0.5 * v * L, 0.5 * v * R


def sonic_x_ratio(exp: SonicExpansion) -> float:
    """Limit of D/G along the analytic solution at the triple point."""
    V, C = exp.star
    c1 = exp.c1
    F_C, F_V, G_C, G_V = eval_partials(exp.cfg, exp.star)
    den = G_V + G_C * c1
    if abs(den) < 1e-12:
        raise NumericalAnomaly("degenerate D/G limit at the sonic point")
    return (2.0 * (1.0 + V) - 2.0 * C * c1) / den


# --- right-hand sides -------------------------------------------------------


def _rhs_V(cfg):
    lam, m1 = cfg.lam, cfg.m + 1

    def rhs(V, y):
        C = y[0]
        F = eval_F(cfg, V, C)
        G = eval_G(cfg, V, C)
        DG = eval_D(V, C) / G
        return [F / G, -lam * DG, -(m1 * V * DG + 1.0) / (1.0 + V)]

    return rhs


def _rhs_s(cfg):
    """In s = ln(-V) with state (C/(-V), ln(-x) - s, ln R)."""
    lam, m1 = cfg.lam, cfg.m + 1

    def rhs(s, y):
        V = -math.exp(s)
        C = y[0] * -V
        F = eval_F(cfg, V, C)
        G = eval_G(cfg, V, C)
        DG = eval_D(V, C) / G
        return [-F / G - y[0], -lam * DG * V - 1.0, -(m1 * V * DG + 1.0) / (1.0 + V) * V]

    return rhs


def _event(fun, terminal=True, direction=0):
    fun.terminal = terminal
    fun.direction = direction
    return fun


def _classify(sol, events_status: list[Status]) -> Status:
    if sol.status == 1:
        for k, ev in enumerate(sol.t_events):
            if len(ev):
                return events_status[k]
    if sol.status == -1:
        return Status.STEP_FAILURE
    return Status.REACHED


def _segment_V(sol, lo: float, hi: float):
    def seg(V):
        if lo <= V <= hi:
            C, L, R = sol.sol(V)
            return float(C), float(L), float(R)
        return None

    return seg


def _segment_s(sol, lo: float, hi: float):
    def seg(V):
        if lo <= V <= hi and V < 0.0:
            s = math.log(-V)
            y, L2, R = sol.sol(s)
            return float(y * -V), float(L2 + s), float(R)
        return None

    return seg


def _band_nodes(exp: SonicExpansion, eps: float, sign: float):
    Vs = exp.star.V + sign * eps * np.linspace(0.0, 1.0, BAND_NODES)
    out = []
    for V in Vs:
        C, L, R = _band_state(exp, V)
        out.append((V, C, L, R, eval_expansion(exp, V, strict=False)[1]))
    return out


def _ivp(rhs, span, y0, rtol, atol, events):
    return solve_ivp(
        rhs,
        span,
        y0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=events,
    )


def _dense_nodes(sol, t0: float, t1: float, n: int):
    ts = np.linspace(t0, t1, n)
    return ts, sol.sol(ts)


def propagate_left(
    exp: SonicExpansion, V_target: float | None = None, rtol: float = RTOL, atol: float = ATOL
) -> Trajectory:
    """Integrate from the band edge V* - eps down to V_target (default V1)."""
    cfg = exp.cfg
    if V_target is None:
        V_target = jump_state(cfg.gamma)[0].V
    gap = exp.star.V - V_target
    if not gap > 0.0:
        raise ValueError(f"target V={V_target!r} not left of the sonic point")
    # a target close to V* (gamma near 1, z near z_m) shrinks the band
    eps = min(handoff_offset(exp), gap / 2.0)
    V0 = exp.star.V - eps
    band = _band_nodes(exp, eps, -1.0)
    _, C0, L0, R0, _ = band[-1]

    blow = _event(lambda V, y: BLOWUP_C - y[0])
    sol = _ivp(_rhs_V(cfg), (V0, V_target), [C0, L0, R0], rtol, atol, [blow])
    status = _classify(sol, [Status.BLOWUP])
    t_end = float(sol.t[-1])
    ts, ys = _dense_nodes(sol, V0, t_end, MIN_NODES)
    return _assemble(Side.LEFT, exp, band, ts, ys, status, eps, rtol, atol, True,
                     (_segment_V(sol, t_end, V0),))


def propagate_right(
    exp: SonicExpansion, rtol: float = RTOL, atol: float = ATOL, guarded: bool = True
) -> Trajectory:
    """Integrate from V* + eps toward the origin, switching to ln(-V) near it."""
    cfg = exp.cfg
    eps = handoff_offset(exp)
    V0 = exp.star.V + eps
    band = _band_nodes(exp, eps, 1.0)
    _, C0, L0, R0, _ = band[-1]

    axis = _event(lambda V, y: y[0] - AXIS_C, direction=-1)
    blow = _event(lambda V, y: BLOWUP_C - y[0])
    V_sw = max(S_SWITCH_V, V0) if V0 < S_SWITCH_V else V0
    segments = []
    ts_all, ys_all = [], []
    status = Status.REACHED
    if V0 < S_SWITCH_V:
        sol = _ivp(_rhs_V(cfg), (V0, S_SWITCH_V), [C0, L0, R0], rtol, atol, [axis, blow])
        status = _classify(sol, [Status.HIT_V_AXIS, Status.BLOWUP])
        t_end = float(sol.t[-1])
        segments.append(_segment_V(sol, V0, t_end))
        ts, ys = _dense_nodes(sol, V0, t_end, MIN_NODES)
        ts_all.append(ts)
        ys_all.append(ys)
        V_sw, C_sw, L_sw, R_sw = t_end, *sol.y[:, -1]
    else:
        V_sw, C_sw, L_sw, R_sw = V0, C0, L0, R0

    if status is Status.REACHED:
        s0, s1 = math.log(-V_sw), math.log(-STOP_V)
        axis_s = _event(lambda s, y: y[0] * math.exp(s) - AXIS_C, direction=0)
        sol = _ivp(_rhs_s(cfg), (s0, s1), [C_sw / -V_sw, L_sw - s0, R_sw], rtol, atol, [axis_s])
        status = _classify(sol, [Status.HIT_V_AXIS])
        s_end = float(sol.t[-1])
        segments.append(_segment_s(sol, -math.exp(s0), -math.exp(s_end)))
        ss = np.linspace(s0, s_end, MIN_NODES)
        y = sol.sol(ss)
        Vs = -np.exp(ss)
        ts_all.append(Vs[1:])
        ys_all.append(np.vstack([y[0] * -Vs, y[1] + ss, y[2]])[:, 1:])

    ts = np.concatenate(ts_all) if ts_all else np.empty(0)
    ys = np.hstack(ys_all) if ys_all else np.empty((3, 0))
    return _assemble(Side.RIGHT, exp, band, ts, ys, status, eps, rtol, atol, guarded, tuple(segments))


def _assemble(side, exp, band, ts, ys, status, eps, rtol, atol, guarded, segments) -> Trajectory:
    cfg = exp.cfg
    bV = np.array([b[0] for b in band])
    bC = np.array([b[1] for b in band])
    bL = np.array([b[2] for b in band])
    bR = np.array([b[3] for b in band])
    bS = np.array([b[4] for b in band])
    # the first dense node repeats the band edge
    tV, tC, tL, tR = ts[1:], ys[0, 1:], ys[1, 1:], ys[2, 1:]
    tS = np.array([eval_F(cfg, v, c) / eval_G(cfg, v, c) for v, c in zip(tV, tC)])
    return Trajectory(
        side=side,
        V=np.concatenate([bV, tV]),
        C=np.concatenate([bC, tC]),
        lnx=np.concatenate([bL, tL]),
        lnR=np.concatenate([bR, tR]),
        dCdV=np.concatenate([bS, tS]),
        exp=exp,
        status=status,
        eps=eps,
        rtol=rtol,
        atol=atol,
        guarded=guarded,
        _segments=segments,
    )


def attach_x(traj: Trajectory, anchor: str | Trajectory = "shock") -> Trajectory:
    """Shift ln(-x) and ln R to an absolute normalization.

    ``anchor="shock"`` puts x = -1 and R = R1 at V1 (left branch ending at
    V1).  Passing the already anchored left trajectory instead continues the
    right branch through the sonic point with the same normalization.
    """
    if anchor == "shock":
        if traj.side is not Side.LEFT or traj.status is not Status.REACHED:
            raise ValueError("shock anchoring needs a completed left trajectory")
        (V1, _), R1 = jump_state(traj.cfg.gamma)
        if not math.isclose(traj.V[-1], V1, rel_tol=0.0, abs_tol=1e-12):
            raise ValueError("left trajectory does not end at V1")
        lshift = -float(traj.lnx[-1])
        rshift = math.log(R1) - float(traj.lnR[-1])
    else:
        lshift, rshift = anchor.lnx_shift, anchor.lnR_shift
    return replace(
        traj,
        lnx=traj.lnx - traj.lnx_shift + lshift,
        lnR=traj.lnR - traj.lnR_shift + rshift,
        lnx_shift=lshift,
        lnR_shift=rshift,
    )


def sign_audit(traj: Trajectory, skip: int = 1) -> dict[str, int]:
    """Count interior nodes violating the expected signs of F, G, D."""
    cfg = traj.cfg
    want = (1, -1, -1) if traj.side is Side.LEFT else (-1, 1, 1)
    bad = {"F": 0, "G": 0, "D": 0}
    for V, C in zip(traj.V[skip:], traj.C[skip:]):
        F, G, D = eval_F(cfg, V, C), eval_G(cfg, V, C), eval_D(V, C)
        for key, val, sgn in (("F", F, want[0]), ("G", G, want[1]), ("D", D, want[2])):
            if val * sgn <= 0.0:
                bad[key] += 1
    return bad
