from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from guderley.shooting import solve_zstd  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


SOLVED: dict[tuple[float, int], object] = {}
ACCEPTANCE: dict[int, str] = {}


def solved(gamma: float, m: int):
    """Converged solution with both branches, shared across the session."""
    key = (gamma, m)
    if key not in SOLVED:
        SOLVED[key] = solve_zstd(gamma, m)
    return SOLVED[key]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])


@pytest.fixture(scope="session")
def solve():
    return solved
