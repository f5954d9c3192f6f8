import numpy as np
import pytest

_ACCEPTANCE = []


def record_acceptance(criterion: str, passed: bool, detail: str = ""):
    _ACCEPTANCE.append((criterion, bool(passed), detail))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in _ACCEPTANCE:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {criterion}: {detail}")
