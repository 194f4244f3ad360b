import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from testbed_mapper.isomorphism import (
    brute_force_induced_mappings,
    candidate_array,
    enumerate_induced_mappings,
    is_induced_placement,
    iter_induced_assignments,
    placement_order,
)
from testbed_mapper.request import ChannelDemand, NodeKind, Request, RequestError
from testbed_mapper.topology import InterfaceType, TestbedTopology, build_grid

from conftest import EDGE, PAIR, PATH3, TRIANGLE, complete_graph, make_request


def _sym(draw, n, p_draw):
    m = np.zeros((n, n), dtype=np.uint8)
    for i, j in itertools.combinations(range(n), 2):
        if draw(p_draw):
            m[i, j] = m[j, i] = 1
    return m


@st.composite
def placement_cases(draw):
    n = draw(st.integers(1, 6))
    n_types = draw(st.integers(1, 3))
    have = np.array([[draw(st.booleans()) or t == 0 for t in range(n_types)] for _ in range(n)])
    shared = draw(st.booleans())
    density = draw(st.sampled_from([0.2, 0.5, 0.8]))
    edge = st.floats(0, 1).map(lambda x: x < density)
    conn = []
    base = _sym(draw, n, edge)
    for t in range(n_types):
        m = base.copy() if shared else _sym(draw, n, edge)
        mask = np.outer(have[:, t], have[:, t])
        conn.append(m * mask)
    types = tuple(InterfaceType(t, 13) for t in range(n_types))
    testbed = TestbedTopology(n, types, np.array(conn), have)
    n_r = draw(st.integers(1, 4))
    g = _sym(draw, n_r, st.booleans())
    demanded = draw(st.lists(st.integers(0, n_types - 1), min_size=1, max_size=n_types, unique=True))
    r = Request(0, n_r, g, tuple(ChannelDemand.flexible(t, 1) for t in sorted(demanded)))
    return testbed, r


@settings(max_examples=150, deadline=None)
@given(placement_cases())
def test_enumerator_matches_permutation_oracle(case):
    testbed, r = case
    fast = enumerate_induced_mappings(r, testbed)
    oracle = brute_force_induced_mappings(r, testbed)
    assert len(fast) == len({m.assignment for m in fast})
    assert {m.assignment for m in fast} == {m.assignment for m in oracle}
    for m in fast:
        assert is_induced_placement(r, testbed, m.assignment)


@settings(max_examples=60, deadline=None)
@given(placement_cases(), st.integers(1, 20))
def test_limit_takes_prefix_of_full_order(case, limit):
    testbed, r = case
    full = enumerate_induced_mappings(r, testbed)
    assert enumerate_induced_mappings(r, testbed, limit) == full[:limit]


def test_single_edge_into_k3(k3):
    r = make_request(0, EDGE)
    assert len(brute_force_induced_mappings(r, k3)) == 6
    assert len(enumerate_induced_mappings(r, k3)) == 6


def test_disconnected_pair_into_k3(k3):
    r = make_request(0, PAIR)
    assert enumerate_induced_mappings(r, k3) == []
    assert brute_force_induced_mappings(r, k3) == []


@pytest.mark.parametrize("rows,cols", [(2, 2), (3, 3), (4, 5), (6, 6)])
def test_no_triangle_in_grid(rows, cols):
    assert enumerate_induced_mappings(make_request(0, TRIANGLE), build_grid(rows, cols)) == []


def test_path_into_grid_counts():
    grid = build_grid(3, 3)
    r = make_request(0, PATH3)
    oracle = brute_force_induced_mappings(r, grid)
    assert len(oracle) == 44
    assert len(enumerate_induced_mappings(r, grid)) == 44


def test_request_larger_than_testbed():
    r = make_request(0, np.zeros((4, 4)))
    tb = complete_graph(3)
    assert brute_force_induced_mappings(r, tb) == []
    assert enumerate_induced_mappings(r, tb) == []


def test_single_node_counts_interface_holders():
    conn = np.zeros((2, 5, 5), dtype=np.uint8)
    have = np.array([[1, 1], [1, 0], [1, 1], [1, 0], [1, 1]])
    tb = TestbedTopology(5, (InterfaceType(0, 13), InterfaceType(1, 13)), conn, have)
    r = make_request(0, [[0]], types=(1,))
    assert len(brute_force_induced_mappings(r, tb)) == 3
    assert [m.assignment for m in enumerate_induced_mappings(r, tb)] == [(0,), (2,), (4,)]


def test_every_demanded_interface_must_realize_topology():
    # interface 1 lacks the 0-1 link, so a request using both types cannot sit on that pair
    conn = np.zeros((2, 3, 3), dtype=np.uint8)
    conn[0, 0, 1] = conn[0, 1, 0] = 1
    conn[0, 1, 2] = conn[0, 2, 1] = 1
    conn[1, 1, 2] = conn[1, 2, 1] = 1
    tb = TestbedTopology(3, (InterfaceType(0, 13), InterfaceType(1, 13)), conn, None)
    both = make_request(0, EDGE, types=(0, 1))
    found = {m.assignment for m in enumerate_induced_mappings(both, tb)}
    assert found == {(1, 2), (2, 1)}
    only0 = make_request(1, EDGE, types=(0,))
    assert len(enumerate_induced_mappings(only0, tb)) == 4


def test_order_is_deterministic_dfs():
    grid = build_grid(3, 3)
    r = make_request(0, PATH3)
    # the middle node (degree 2) is placed first, candidates in ascending index
    assert placement_order(r.topology) == [1, 0, 2]
    first = [m.assignment for m in enumerate_induced_mappings(r, grid, limit=3)]
    assert first == [(1, 0, 3), (3, 0, 1), (0, 1, 2)]
    assert enumerate_induced_mappings(r, grid) == enumerate_induced_mappings(r, grid)


def test_automorphic_placements_are_kept(k3):
    maps = enumerate_induced_mappings(make_request(0, EDGE), k3)
    node_sets = [frozenset(m.assignment) for m in maps]
    assert len(set(node_sets)) == 3 and len(maps) == 6


def test_candidate_array_matches_list():
    grid = build_grid(4, 4)
    r = make_request(3, PATH3)
    arr = candidate_array(r, grid, limit=10)
    assert arr.shape == (10, 3)
    assert [tuple(row) for row in arr.tolist()] == [m.assignment for m in enumerate_induced_mappings(r, grid, 10)]
    empty = candidate_array(make_request(0, TRIANGLE), grid)
    assert empty.shape == (0, 3)


def test_invalid_request_or_limit_rejected():
    grid = build_grid(3, 3)
    with pytest.raises(RequestError):
        enumerate_induced_mappings(make_request(0, EDGE, types=(7,)), grid)
    with pytest.raises(ValueError):
        enumerate_induced_mappings(make_request(0, EDGE), grid, limit=0)


def test_is_induced_placement_rejects_bad_maps(k3):
    r = make_request(0, EDGE)
    assert is_induced_placement(r, k3, (0, 1))
    assert not is_induced_placement(r, k3, (0, 0))
    assert not is_induced_placement(r, k3, (0, 3))
    assert not is_induced_placement(r, k3, (0,))


def test_virtual_flag_does_not_change_placements():
    grid = build_grid(3, 3)
    phys = make_request(0, PATH3)
    virt = make_request(0, PATH3, kind=NodeKind.VIRTUAL)
    assert list(iter_induced_assignments(phys, grid)) == list(iter_induced_assignments(virt, grid))
