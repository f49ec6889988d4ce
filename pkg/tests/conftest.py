import numpy as np
import pytest

from pafparse import builtin


@pytest.fixture(scope="session")
def coco():
    return builtin("coco18")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
