import pytest

from percolab.graphs import RegularTree, TreeCrossZ


@pytest.fixture
def tree3():
    return RegularTree(3)


@pytest.fixture
def treez3():
    return TreeCrossZ(3)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
