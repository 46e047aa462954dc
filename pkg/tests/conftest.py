import pytest

from layered_isp.medium import MediumConfig
from layered_isp.sources import SourceGrid, demo_pair


@pytest.fixture(scope="session")
def layered():
    return MediumConfig(1.0, 1.5, 0.5)


@pytest.fixture(scope="session")
def grid_401():
    return SourceGrid(401)


@pytest.fixture(scope="session")
def demo_401(grid_401):
    return demo_pair(grid_401)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
