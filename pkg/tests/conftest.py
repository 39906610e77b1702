import numpy as np
import pytest

from backtrace.flux import ConvexFlux, burgers, polynomial
from backtrace.piecewise import PiecewiseProfile


def cosh_flux():
    return ConvexFlux(
        lambda u: np.cosh(u) - 1.0, np.sinh, np.cosh, state_range=(-2.0, 2.0), name="cosh"
    )


def quartic_flux():
    return polynomial([0.0, 0.0, 0.5, 0.0, 1.0 / 12.0], (-3.0, 3.0))


@pytest.fixture
def f_burgers():
    return burgers()


@pytest.fixture
def f_cosh():
    return cosh_flux()


@pytest.fixture
def shock():
    """1 on x <= 0, 0 on x > 0."""
    return PiecewiseProfile.step(0.0, 1.0, 0.0)


@pytest.fixture
def ramp():
    """clamp(x, 0, 1)."""
    return PiecewiseProfile.from_pieces([(0.0, 1.0, 0.0, 1.0)], 0.0, 1.0)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
