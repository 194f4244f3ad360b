import json

import numpy as np
import pytest

from testbed_mapper.topology import (
    DEFAULT_INTERFACE_TYPES,
    InterfaceType,
    TestbedTopology,
    TopologyError,
    build_grid,
    build_random,
    eight_node_path,
    load_topology,
    save_topology,
)


def _symmetric_zero_diag(topo):
    for m in topo.connectivity:
        assert np.array_equal(m, m.T)
        assert not np.diag(m).any()


@pytest.mark.parametrize("rows,cols", [(1, 1), (1, 4), (2, 3), (3, 3), (4, 4), (5, 5), (6, 6), (3, 7)])
def test_grid_edge_count(rows, cols):
    topo = build_grid(rows, cols)
    assert topo.n_nodes == rows * cols
    for t in range(topo.n_interface_types):
        assert topo.edge_count(t) == 2 * rows * cols - rows - cols
    _symmetric_zero_diag(topo)
    assert topo.node_interfaces.all()


def test_grid_known_sizes():
    assert build_grid(3, 3).edge_count() == 12
    assert build_grid(6, 6).n_nodes == 36
    assert build_grid(6, 6).edge_count() == 60
    one = build_grid(1, 1)
    assert one.n_nodes == 1 and one.edge_count() == 0


def test_grid_degree_is_at_most_four():
    topo = build_grid(5, 5)
    assert topo.connectivity[0].sum(axis=1).max() == 4


@pytest.mark.parametrize("rows,cols", [(0, 3), (3, 0)])
def test_grid_rejects_zero_dims(rows, cols):
    with pytest.raises(TopologyError):
        build_grid(rows, cols)


def test_random_extremes():
    empty = build_random(5, 0.0, 3)
    assert empty.edge_count() == 0
    full = build_random(5, 1.0, 3)
    assert full.edge_count() == 10
    _symmetric_zero_diag(full)


def test_random_is_pure_in_seed():
    a = build_random(25, 0.3, 42)
    b = build_random(25, 0.3, 42)
    c = build_random(25, 0.3, 43)
    assert np.array_equal(a.connectivity, b.connectivity)
    assert not np.array_equal(a.connectivity, c.connectivity)
    _symmetric_zero_diag(a)
    # identical replication across interface types
    assert all(np.array_equal(a.connectivity[0], m) for m in a.connectivity)


@pytest.mark.parametrize("p", [-0.1, 1.5])
def test_random_rejects_bad_probability(p):
    with pytest.raises(TopologyError):
        build_random(5, p, 0)


def test_interface_budget_must_be_positive():
    with pytest.raises(TopologyError):
        InterfaceType(0, 0)


def _write(tmp_path, data):
    p = tmp_path / "topo.json"
    p.write_text(json.dumps(data))
    return p


def test_load_two_nodes(tmp_path):
    p = _write(tmp_path, {
        "n_nodes": 2,
        "interface_types": [{"id": 0, "max_channels": 13}],
        "connectivity": [[[0, 1], [1, 0]]],
    })
    topo = load_topology(p)
    assert topo.n_nodes == 2 and topo.edge_count() == 1
    assert topo.node_interfaces.all()


@pytest.mark.parametrize(
    "conn,ifaces,match",
    [
        ([[[0, 1], [0, 0]]], None, "symmetric"),
        ([[[1, 0], [0, 0]]], None, "diagonal"),
        ([[[0, 1], [1, 0]]], [[1], [0]], "lack"),
        ([[[0, 2], [2, 0]]], None, "0/1"),
    ],
)
def test_load_rejects_invalid(tmp_path, conn, ifaces, match):
    data = {"n_nodes": 2, "interface_types": [{"id": 0, "max_channels": 13}], "connectivity": conn}
    if ifaces is not None:
        data["node_interfaces"] = ifaces
    with pytest.raises(TopologyError, match=match):
        load_topology(_write(tmp_path, data))


def test_load_rejects_garbage(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(TopologyError):
        load_topology(p)
    with pytest.raises(TopologyError):
        load_topology(_write(tmp_path, {"n_nodes": 2}))


def test_heterogeneous_interfaces_round_trip(tmp_path):
    conn = np.zeros((2, 3, 3), dtype=int)
    conn[0, 0, 1] = conn[0, 1, 0] = 1
    conn[1, 1, 2] = conn[1, 2, 1] = 1
    have = [[1, 0], [1, 1], [0, 1]]
    topo = TestbedTopology(3, (InterfaceType(0, 5), InterfaceType(1, 7)), conn, have)
    p = tmp_path / "t.json"
    save_topology(topo, p)
    back = load_topology(p)
    assert np.array_equal(back.connectivity, topo.connectivity)
    assert np.array_equal(back.node_interfaces, topo.node_interfaces)
    assert back.interface_types == topo.interface_types
    assert topo.nodes_with([0, 1]) == 0b010


def test_bundled_eight_node_topology():
    topo = load_topology(eight_node_path())
    assert topo.n_nodes == 8
    assert topo.interface_types == DEFAULT_INTERFACE_TYPES
    _symmetric_zero_diag(topo)


def test_topology_is_read_only():
    topo = build_grid(2, 2)
    with pytest.raises(ValueError):
        topo.connectivity[0, 0, 1] = 0
