import pytest

from chiralcav.params import PhysicalParams


@pytest.fixture
def nominal():
    return PhysicalParams()


@pytest.fixture
def small():
    """Short, low-truncation scenario for fast propagation tests."""
    return PhysicalParams(N=8, T=40.0)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
