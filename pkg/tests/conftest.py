import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wignerfio.grid import Grid1D
from wignerfio.kernel import kernel_grid

settings.register_profile(
    "wignerfio", deadline=None, max_examples=25, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("wignerfio")


@pytest.fixture(scope="session")
def grid256():
    return Grid1D(16.0, 256)


@pytest.fixture(scope="session")
def grid128():
    return Grid1D(16.0, 128)


@pytest.fixture(scope="session")
def kgrid():
    return kernel_grid()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


#: one line per end-to-end check, filled by test_acceptance
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance checks")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
