"""Converging-shock similarity solutions of the compressible Euler equations."""

from __future__ import annotations

from .barriers import BarrierReport, barrier_suite, check_trajectory_barriers
from .errors import DomainError, GuderleyError, NoBracket, NumericalAnomaly, SingularityError
from .integrate import Trajectory, attach_x, propagate_left, propagate_right
from .model import GasConfig, critical_points, gamma_star, make_config, parameter_windows
from .profile import SimilarityProfile, build_profile, collapse_limits, physical_state
from .series import Branch, SonicExpansion, converged_expansion, expand
from .shooting import ShootResult, scan_residual, solve_zstd, sweep

__version__ = "0.1.0"

__all__ = [
    "BarrierReport",
    "Branch",
    "DomainError",
    "GasConfig",
    "GuderleyError",
    "NoBracket",
    "NumericalAnomaly",
    "ShootResult",
    "SimilarityProfile",
    "SingularityError",
    "SonicExpansion",
    "Trajectory",
    "attach_x",
    "barrier_suite",
    "build_profile",
    "check_trajectory_barriers",
    "collapse_limits",
    "converged_expansion",
    "critical_points",
    "expand",
    "gamma_star",
    "make_config",
    "parameter_windows",
    "physical_state",
    "propagate_left",
    "propagate_right",
    "scan_residual",
    "solve_zstd",
    "sweep",
]
