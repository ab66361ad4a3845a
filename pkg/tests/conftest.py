import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from anomalylab import profiles

settings.register_profile(
    "anomalylab", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("anomalylab")

SQRT_HALF_PI = float(np.sqrt(np.pi / 2))
SCHWINGER = -SQRT_HALF_PI / (2 * np.pi)


@pytest.fixture(scope="session")
def ref():
    return profiles.reference_pair()


@pytest.fixture(scope="session")
def shifted():
    """C displaced from A so that the integral of A V^dagger does not vanish."""
    return profiles.build_profile([(1.0, 0.0, 1.0)], [(1.0, 0.5, 1.0)])


@pytest.fixture(scope="session")
def free_phase():
    return profiles.build_profile([(1.0, 0.0, 1.0)], [])


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[str, str] = {}


def record_acceptance(cid: str, passed: bool, detail: str):
    line = f"{cid} {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[cid] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for cid in sorted(ACCEPTANCE, key=lambda c: int(c[1:])):
            terminalreporter.write_line(ACCEPTANCE[cid])
