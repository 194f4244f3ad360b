import numpy as np
import pytest

from testbed_mapper.request import ChannelDemand, NodeKind, Request
from testbed_mapper.topology import DEFAULT_INTERFACE_TYPES, TestbedTopology

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def complete_graph(n, interface_types=DEFAULT_INTERFACE_TYPES):
    adj = np.ones((n, n), dtype=np.uint8) - np.eye(n, dtype=np.uint8)
    return TestbedTopology(n, tuple(interface_types), np.repeat(adj[None], len(interface_types), 0), None)


def make_request(rid, adj, types=(0,), kind=NodeKind.PHYSICAL, flex=1, priority=1, duration=1, fixed=None):
    adj = np.asarray(adj, dtype=np.uint8)
    if fixed is not None:
        demands = tuple(ChannelDemand.fixed(t, fixed) for t in types)
    else:
        demands = tuple(ChannelDemand.flexible(t, flex) for t in types)
    return Request(rid, adj.shape[0], adj, demands, kind, duration, priority)


EDGE = [[0, 1], [1, 0]]
PAIR = [[0, 0], [0, 0]]
PATH3 = [[0, 1, 0], [1, 0, 1], [0, 1, 0]]
TRIANGLE = [[0, 1, 1], [1, 0, 1], [1, 1, 0]]


@pytest.fixture
def k3():
    return complete_graph(3)
