import sys

import pytest

from netbandit.graph import build_graph

sys.path.insert(0, __import__("os").path.dirname(__file__))


@pytest.fixture
def path4():
    """4-arm path 0-1-2-3 from the worked strategy example."""
    return build_graph(4, [(0, 1), (1, 2), (2, 3)])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
