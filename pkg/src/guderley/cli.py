"""
Command-line interface.

    guderley solve --gamma 1.4 --m 2
    guderley sweep --gamma-from 1.1 --gamma-to 3.0 --step 0.1 --m 2
    guderley profile --gamma 1.4 --m 2 --xmin 1e-4 --out profile.csv
    guderley verify --gamma 2.5 --m 1
    guderley portrait --gamma 1.5 --m 1 --z 0.14

Numbers are written with 17 significant digits so they round-trip.  Errors
go to stderr as JSON; exit codes are 0 on success, 2 for a configuration or
domain error, 3 for a numerical anomaly and 4 when no bracket is found.
"""

from __future__ import annotations

import csv
import functools
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .barriers import barrier_suite, check_trajectory_barriers, delta_ordering, slope_inequalities
from .errors import DomainError, GuderleyError
from .integrate import ATOL, RTOL, propagate_left, propagate_right
from .model import check_gamma, check_m, critical_points, make_config, z_g, z_max, z_min
from .profile import build_profile, collapse_limits, profile_csv, rh_check
from .series import Branch, converged_expansion
from .shooting import DEFAULT_TOL, solve_zstd, sweep

__all__ = ["cli", "dumps"]

_FLAGS = {
    "gamma", "m", "z", "tol", "xmin", "grid_n", "out", "meta", "cache", "threads",
    "gamma_from", "gamma_to", "step", "dump_series", "n", "n_v", "n_z",
}


# --- serialization ----------------------------------------------------------


def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        click.echo(text, nl=not text.endswith("\n"))
    else:
        Path(out).write_text(text, encoding="utf-8", newline="")


def _error(exc: Exception, code: int) -> None:
    payload = exc.to_dict() if isinstance(exc, GuderleyError) else {"error": "config", "message": str(exc)}
    click.echo(dumps(payload), err=True)
    sys.exit(code)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except GuderleyError as exc:
            _error(exc, exc.exit_code)
        except (ValueError, OSError) as exc:
            _error(exc, 2)

    return wrapper


# --- cache ------------------------------------------------------------------


def _cache_key(command: str, gamma: float, m: int, tol: float) -> str:
    key = {"version": __version__, "command": command, "gamma": _num(gamma), "m": m,
           "tol": _num(tol), "rtol": _num(RTOL), "atol": _num(ATOL)}
    return hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()


def _cache_get(cache: str | None, key: str) -> str | None:
    if not cache:
        return None
    try:
        return (Path(cache) / f"{key}.json").read_text(encoding="utf-8")
    except OSError:
        return None


def _cache_put(cache: str | None, key: str, text: str) -> None:
    if not cache:
        return
    try:
        Path(cache).mkdir(parents=True, exist_ok=True)
        tmp = Path(cache) / f"{key}.json.tmp"
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(Path(cache) / f"{key}.json")
    except OSError:
        pass  # the cache is advisory


def _solve_json(gamma: float, m: int, tol: float, cache: str | None) -> str:
    key = _cache_key("solve", gamma, m, tol)
    hit = _cache_get(cache, key)
    if hit is not None:
        return hit
    res = solve_zstd(gamma, m, tol=tol, with_right=False)
    text = dumps(res.to_dict()) + "\n"
    _cache_put(cache, key, text)
    return text


def _check_common(gamma: float | None, m: int, tol: float | None = None) -> None:
    if gamma is not None:
        check_gamma(gamma)
    check_m(m)
    if tol is not None and not 1e-12 <= tol < 1e-2:
        raise DomainError("tol must lie in [1e-12, 1e-2)")


# --- options ----------------------------------------------------------------


def _gamma_m(fn):
    fn = click.option("--m", "m", type=int, default=2, show_default=True, help="1 cylindrical, 2 spherical")(fn)
    fn = click.option("--gamma", type=float, required=True, help="adiabatic exponent in (1, 3]")(fn)
    return fn


def _tol(fn):
    return click.option("--tol", type=float, default=DEFAULT_TOL, show_default=True,
                        help="residual tolerance for the shooting root")(fn)


def _load_config(ctx: click.Context, _param, path: str | None):
    if path is None:
        return None
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        _error(ValueError(f"cannot read config {path}: {exc}"), 2)
    if not isinstance(data, dict):
        _error(ValueError("config file must hold a JSON object"), 2)
    flat = {str(k).replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(flat) - _FLAGS)
    if unknown:
        _error(ValueError(f"unknown config keys: {', '.join(unknown)}"), 2)
    ctx.default_map = {name: dict(flat) for name in ("solve", "sweep", "profile", "verify", "portrait")}
    return path


@click.group()
@click.version_option(__version__, prog_name="guderley")
@click.option("--config", type=click.Path(dir_okay=False), callback=_load_config, is_eager=True,
              expose_value=False, help="JSON file whose keys mirror the flags")
def cli() -> None:
    """Converging-shock similarity solutions: solve, sweep, profile, verify, portrait."""


# --- solve ------------------------------------------------------------------


@cli.command()
@_gamma_m
@_tol
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="write the JSON result here")
@click.option("--cache", type=click.Path(file_okay=False), default=None, help="directory for cached results")
@_guarded
def solve(gamma: float, m: int, tol: float, out: str | None, cache: str | None) -> None:
    """Find the similarity exponent for one (gamma, m)."""
    _check_common(gamma, m, tol)
    text = _solve_json(gamma, m, tol, cache)
    if out is None:
        _emit(text, None)
        return
    _emit(text, out)
    d = json.loads(text)
    click.echo(f"z_std={_num(d['z_std'])} lambda={_num(d['lambda_std'])} "
               f"triple={d['triple_point']} residual={_num(d['residual'])}")


# --- sweep ------------------------------------------------------------------


def _gamma_grid(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0.0 or hi < lo:
        raise DomainError("sweep needs step > 0 and gamma-to >= gamma-from")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + k * step, 12) for k in range(n + 1)]


@cli.command("sweep")
@click.option("--gamma-from", type=float, required=True)
@click.option("--gamma-to", type=float, required=True)
@click.option("--step", type=float, default=0.1, show_default=True)
@click.option("--m", "m", type=int, default=2, show_default=True)
@_tol
@click.option("--threads", type=int, default=None, help="worker threads (default: all cores)")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV path (default stdout)")
@click.option("--cache", type=click.Path(file_okay=False), default=None)
@_guarded
def sweep_cmd(gamma_from, gamma_to, step, m, tol, threads, out, cache) -> None:
    """Tabulate z_std over a gamma grid."""
    gammas = _gamma_grid(gamma_from, gamma_to, step)
    _check_common(None, m, tol)
    for g in gammas:
        check_gamma(g)
    rows: dict[float, dict] = {}
    todo = []
    for g in gammas:
        hit = _cache_get(cache, _cache_key("solve", g, m, tol))
        if hit is not None:
            rows[g] = json.loads(hit)
        else:
            todo.append(g)
    worst = 0
    results = sweep(todo, m, tol=tol, threads=threads or os.cpu_count() or 1) if todo else []
    for g, res in zip(todo, results):
        if isinstance(res, GuderleyError):
            click.echo(json.dumps({"gamma": g, "m": m, **res.to_dict()}, default=float), err=True)
            worst = max(worst, res.exit_code)
            continue
        d = res.to_dict()
        _cache_put(cache, _cache_key("solve", g, m, tol), dumps(d) + "\n")
        rows[g] = d
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["gamma", "m", "z_std", "lambda", "triple", "residual"])
    for g in gammas:
        if g in rows:
            d = rows[g]
            w.writerow([_num(g), m, _num(d["z_std"]), _num(d["lambda_std"]), d["triple_point"], _num(d["residual"])])
    _emit(buf.getvalue(), out)
    if worst:
        sys.exit(worst)


# --- profile ----------------------------------------------------------------


@cli.command()
@_gamma_m
@_tol
@click.option("--xmin", type=float, default=1e-4, show_default=True, help="smallest |x| sampled")
@click.option("--grid-n", type=int, default=400, show_default=True, help="grid points")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="profile CSV (default stdout)")
@click.option("--meta", type=click.Path(dir_okay=False), default=None,
              help="metadata JSON (default: next to --out with a .json suffix)")
@_guarded
def profile(gamma, m, tol, xmin, grid_n, out, meta) -> None:
    """Similarity profiles V(x), C(x), R(x) on [-1, -xmin]."""
    _check_common(gamma, m, tol)
    res = solve_zstd(gamma, m, tol=tol)
    prof = build_profile(res, xmin, grid_n)
    md = prof.metadata()
    md["rh_check"] = rh_check(prof)
    md["collapse_limits"] = collapse_limits(prof) if xmin <= 1e-4 else None
    _emit(profile_csv(prof), out)
    if meta is None and out not in (None, "-"):
        meta = str(Path(out).with_suffix(".json"))
    if meta is not None:
        _emit(dumps(md) + "\n", meta)


# --- verify -----------------------------------------------------------------


@cli.command()
@_gamma_m
@_tol
@click.option("--n-v", type=int, default=1000, show_default=True, help="V samples per sign claim")
@click.option("--n-z", type=int, default=100, show_default=True, help="z samples per sign claim")
@click.option("--dump-series", type=click.Path(dir_okay=False), default=None,
              help="write the sonic series coefficients of the solution to this JSON file")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guarded
def verify(gamma, m, tol, n_v, n_z, dump_series, out) -> None:
    """Barrier sign claims at this gamma and barrier checks on the solution.

    Emits a JSON array of reports; exits 3 if any report fails.
    """
    _check_common(gamma, m, tol)
    res = solve_zstd(gamma, m, tol=tol)
    reports = check_trajectory_barriers(res.left_traj) + check_trajectory_barriers(res.right_traj)
    cfg = res.left_traj.cfg
    if res.triple is Branch.P6 and gamma <= 2.0 and z_g(gamma, m) <= res.z_std <= z_max(gamma):
        reports.append(slope_inequalities(cfg, Branch.P6))
    if gamma <= 2.0:
        reports.append(delta_ordering(gamma, m))
    reports.extend(barrier_suite(n_v=n_v, n_z=n_z, gamma=gamma, ms=(m,)))
    if dump_series:
        exp = res.left_traj.exp
        series = {
            "gamma": gamma,
            "m": m,
            "z": res.z_std,
            "triple_point": exp.which.value,
            "V_star": exp.star.V,
            "C_star": exp.star.C,
            "order": exp.N,
            "K_est": exp.K_est,
            "radius_est": exp.radius_est,
            "coefficients": [_num(c) for c in exp.c],
        }
        _emit(dumps(series) + "\n", dump_series)
    _emit(dumps([r.to_dict() for r in reports]) + "\n", out)
    if not all(r.passed for r in reports):
        sys.exit(3)


# --- portrait ---------------------------------------------------------------


def _nullclines(cfg, Vs: np.ndarray):
    """(label, V, C) rows of D = 0, F = 0 and G = 0 in the upper half plane."""
    rows = []
    for V in Vs:
        rows.append(("D=0", "C=|1+V|", V, abs(1.0 + V)))
    u = 1.0 + Vs
    with np.errstate(divide="ignore", invalid="ignore"):
        f2 = u * (cfg.a1 * u * u - cfg.a2 * u + cfg.a3) / (u + cfg.mz)
        g2 = Vs * u * (cfg.lam + Vs) / ((cfg.m + 1) * Vs + 2.0 * cfg.mz)
    for V in Vs:
        rows.append(("F=0", "C=0", V, 0.0))
    for V, c2 in zip(Vs, f2):
        if np.isfinite(c2) and c2 >= 0.0 and abs(V + 1.0 + cfg.mz) > 1e-9:
            rows.append(("F=0", "branch", V, math.sqrt(c2)))
    for V, c2 in zip(Vs, g2):
        if np.isfinite(c2) and c2 >= 0.0 and c2 < 1e3:
            rows.append(("G=0", "branch", V, math.sqrt(c2)))
    return rows


@cli.command()
@_gamma_m
@click.option("--z", type=float, default=None, help="similarity parameter (default: z_std)")
@click.option("--n", type=int, default=801, show_default=True, help="samples per nullcline")
@_tol
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV path (default stdout)")
@_guarded
def portrait(gamma, m, z, n, tol, out) -> None:
    """Plot-ready layers: nullclines, critical points and solution curves."""
    _check_common(gamma, m, tol)
    if z is None:
        z = solve_zstd(gamma, m, tol=tol, with_right=False).z_std
    cfg = make_config(gamma, m, z)
    Vs = np.linspace(-cfg.lam - 0.25, 0.25, n)
    rows = _nullclines(cfg, Vs)
    cps = critical_points(cfg)
    for name in ("P0", "P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8", "P9"):
        p = getattr(cps, name)
        if math.isfinite(p.V) and math.isfinite(p.C):
            rows.append(("critical", name, p.V, p.C))
    for which in (Branch.P6, Branch.P8):
        if which is Branch.P6 and z < z_min(gamma):
            continue
        try:
            exp = converged_expansion(cfg, which)
        except GuderleyError:
            continue
        for side, prop in (("left", propagate_left), ("right", propagate_right)):
            try:
                traj = prop(exp)
            except GuderleyError:
                continue
            for V, C in zip(traj.V, traj.C):
                rows.append(("trajectory", f"{which.value}-{side}", V, C))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["layer", "label", "V", "C"])
    for layer, label, V, C in rows:
        w.writerow([layer, label, _num(V), _num(C)])
    _emit(buf.getvalue(), out)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
