import numpy as np
import pytest

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        notes = {k: v for k, v in report.user_properties}
        _ACCEPTANCE[name] = (report.outcome, notes)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        outcome, notes = _ACCEPTANCE[name]
        status = "PASS" if outcome == "passed" else "FAIL"
        extra = "  ".join(f"{k}={v}" for k, v in notes.items())
        terminalreporter.write_line(f"{status}  {name}  {extra}".rstrip())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
