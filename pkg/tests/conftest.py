from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from rmtmoments import tau_recurrence_table

settings.register_profile(
    "ci",
    deadline=None,
    max_examples=60,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def tau_table_ell0():
    """Recurrence table for the symplectic / odd-orthogonal families."""
    return tau_recurrence_table(12, 0)


@pytest.fixture(scope="session")
def tau_table_ellm1():
    """Recurrence table for the even orthogonal family."""
    return tau_recurrence_table(12, -1)
