import numpy as np
import pytest

from vgvalid.garch import GjrGarchParams
from vgvalid.stats import NoiseFamily


def _params(alpha0, alpha1, beta1, gamma1, dof):
    return GjrGarchParams(alpha0, alpha1, beta1, gamma1, NoiseFamily.student_t(dof))


# Published GJR-GARCH fits of daily percent returns of three equity indices.
SP500 = _params(0.002, 0.0, 0.926, 0.14, 8.9)
MERVAL = _params(0.12, 0.041, 0.86, 0.13, 5.7)
DAX = _params(0.010, 0.025, 0.923, 0.10, 9.2)


@pytest.fixture
def sp500():
    return SP500


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
