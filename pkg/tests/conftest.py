import warnings

import pytest

from susy_otoc import OperatorContent, susy_ho_model
from susy_otoc.otoc import ConvergenceWarning

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(autouse=True)
def _quiet_tail_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        yield


@pytest.fixture(scope="session")
def ho40():
    return susy_ho_model(40, 1.0)


@pytest.fixture(scope="session")
def ho12():
    return susy_ho_model(12, 1.0)


@pytest.fixture
def bos():
    return OperatorContent.bosonic_only()


@pytest.fixture
def full():
    return OperatorContent.full()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
