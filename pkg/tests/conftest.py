import numpy as np
import pytest

from kregret import Dataset, normalize

# six computers: (CPU clock, brand recognition)
COMPUTERS = np.array([
    [2.3, 80.0],
    [1.7, 90.0],
    [2.8, 50.0],
    [2.1, 55.0],
    [2.1, 50.0],
    [3.0, 55.0],
])

ACCEPTANCE_LINES = []


@pytest.fixture
def computers():
    return Dataset(COMPUTERS)


@pytest.fixture
def computers_norm():
    return normalize(Dataset(COMPUTERS))


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
