import numpy as np
import pytest

from lhtl.dispersion import CircuitParams


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def caption_line():
    """Figure-caption line values with light loss."""
    return CircuitParams(R=0.2, G=0.05, L=398e-6, C=995e-12, z0=4e-6, omega=3e9)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
