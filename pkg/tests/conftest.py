import math

import pytest

from semisplit import CubeNoiseSemigroup, TriangleDomain, harmonic_measure

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_domain():
    return TriangleDomain.with_defaults(-0.5 * math.log(0.5))


@pytest.fixture(scope="session")
def default_measure(default_domain):
    return harmonic_measure(default_domain, 64)


@pytest.fixture(scope="session")
def cube3():
    return CubeNoiseSemigroup(3)
