import pytest

from weakoam import GridSpec
from weakoam import scenarios

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def grid():
    return GridSpec(256, 8.0)


@pytest.fixture(scope="session")
def A_example():
    return scenarios.example_observable()


@pytest.fixture(scope="session")
def H():
    return scenarios.horizontal()


@pytest.fixture(scope="session")
def f_example():
    return scenarios.near_orthogonal(0.1)


@pytest.fixture
def record_criterion():
    """Register a one-line verdict for the acceptance summary."""
    def record(label, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

