import numpy as np
import pytest

from backwater_uq.channel import garonne_analog
from backwater_uq.sampling import garonne_inputs

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def model():
    return garonne_analog()


@pytest.fixture(scope="session")
def space():
    return garonne_inputs()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
