import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

V0 = 0.75

# filled by the acceptance tests, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_state(rng, n, offset=0):
    from coinless_walk.core import LineState

    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    return LineState(offset, a / np.linalg.norm(a))


def random_angles(rng, n=4):
    return tuple(rng.uniform(0, 2 * math.pi, n))
