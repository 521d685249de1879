import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from homsim.state import build_grid, spdc_state  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def grid3():
    return build_grid(3, 1.0)


@pytest.fixture
def grid5():
    return build_grid(5, 1.0)


@pytest.fixture
def spdc3(grid3):
    return spdc_state(grid3)


_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        detail = dict(report.user_properties).get("detail", "")
        _acceptance[report.nodeid] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (outcome, detail) in _acceptance.items():
        name = nodeid.split("::")[-1].removeprefix("test_")
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status} {name}: {detail}")
