import pytest

from graderoute.topology import Topology


@pytest.fixture
def line3():
    return Topology.from_edges(3, [(0, 1, 5.0), (1, 2, 5.0)])


@pytest.fixture
def triangle():
    # direct link 0-2 (bw 5) against the detour 0-1 (8), 1-2 (2)
    return Topology.from_edges(3, [(0, 1, 8.0), (1, 2, 2.0), (0, 2, 5.0)])


@pytest.fixture
def two_region_bridge():
    # regions {0,1,2} and {3,4,5}; the only bridge is 2-3
    edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)]
    return Topology.from_edges(6, edges, pnr=3)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
