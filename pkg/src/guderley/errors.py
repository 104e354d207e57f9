"""Exception hierarchy shared by the solver layers and mapped to CLI exit codes."""

from __future__ import annotations


class GuderleyError(Exception):
    """Base class. ``exit_code`` is what the CLI returns when this escapes."""

    exit_code = 3
    kind = "error"

    def to_dict(self) -> dict[str, object]:
        return {"error": self.kind, "message": str(self)}


class DomainError(GuderleyError, ValueError):
    """A parameter lies outside the admissible range."""

    exit_code = 2
    kind = "domain"


class SingularityError(GuderleyError, ZeroDivisionError):
    """Evaluation requested at a pole of the phase-plane functions."""

    exit_code = 3
    kind = "singularity"


class NumericalAnomaly(GuderleyError, ArithmeticError):
    """Something that the analysis says cannot happen did happen numerically."""

    exit_code = 3
    kind = "anomaly"


class NoBracket(GuderleyError):
    """The residual never changed sign over the planned window."""

    exit_code = 4
    kind = "no-bracket"

    def __init__(self, message: str, scan: list[tuple[float, float]] | None = None):
        super().__init__(message)
        self.scan = list(scan or [])

    def to_dict(self) -> dict[str, object]:
        d = super().to_dict()
        d["scan"] = [[z, r] for z, r in self.scan]
        return d
