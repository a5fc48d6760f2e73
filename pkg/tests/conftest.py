import sys

import pytest

from qfracsl.qcore import QLattice


@pytest.fixture(scope="session")
def lat05():
    return QLattice(0.5)


@pytest.fixture(scope="session", params=[0.3, 0.5, 0.8], ids=lambda q: f"q={q}")
def lattice(request):
    return QLattice(request.param)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
