from __future__ import annotations

import pytest

from guderley.model import gamma_star

# similarity exponents alpha = 1/lambda tabulated in the converging-shock literature
PUBLISHED_ALPHA = [
    (5 / 3, 2, 0.688377),
    (5 / 3, 1, 0.815625),
    (1.4, 2, 0.717175),
    (1.4, 1, 0.835323),
    (3.0, 2, 0.636411),
]


@pytest.mark.parametrize("gamma,m,alpha", PUBLISHED_ALPHA)
def test_published_exponents(solve, gamma, m, alpha):
    assert abs(1.0 / solve(gamma, m).lambda_std - alpha) < 1e-6


def test_frozen_values(solve):
    assert solve(1.4, 2).lambda_std == pytest.approx(1.3943607837753533, abs=1e-9)
    assert solve(1.4, 2).z_std == pytest.approx(0.14084313706262616, abs=1e-9)
    assert solve(3.0, 2).z_std == pytest.approx(0.0952187705485807, abs=1e-9)
    assert gamma_star() == pytest.approx(1.7028725473198394, abs=1e-12)
