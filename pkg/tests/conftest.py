"""Session-scoped fixtures shared by the test modules.

Hamiltonian assembly is quadrature-heavy, so geometries used by several
test files are built once per session.
"""

import numpy as np
import pytest

from openwg.propagate import evolve
from openwg.star import Geometry, build_hamiltonian

# one line per acceptance criterion, echoed after the run so the verdicts
# survive pytest's output capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)


@pytest.fixture(scope="session")
def geom10():
    return Geometry(0.23, 10.0, 0.15)


@pytest.fixture(scope="session")
def geom5():
    return Geometry(0.23, 5.0, 0.15)


@pytest.fixture(scope="session")
def h10(geom10):
    return build_hamiltonian(geom10)


@pytest.fixture(scope="session")
def h5(geom5):
    return build_hamiltonian(geom5)


@pytest.fixture(scope="session")
def trace10(h10):
    """Unmodulated w_e = 10 trace long enough to contain the revival peak."""
    return evolve(h10, z_max=80.0, method="expm")


@pytest.fixture(scope="session")
def energy10(trace10):
    return np.column_stack([trace10.z_grid, trace10.energy_sys()])
