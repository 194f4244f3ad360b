"""Induced subgraph isomorphism: every placement of a request topology on the testbed.

The matcher is a VF2-style depth-first search with induced semantics. Request
nodes are placed in a fixed order (descending degree, then index); at each
step the feasible testbed nodes are the intersection of neighbour sets (for
request edges) and non-neighbour sets (for request non-edges) of the already
placed nodes, over every demanded interface type. Node sets are Python int
bitmasks, so candidate filtering is a handful of AND operations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .request import Request, validate_request
from .topology import TestbedTopology


@dataclass(frozen=True)
class PlacementMapping:
    request_id: int
    assignment: tuple[int, ...]


def placement_order(topology: np.ndarray) -> list[int]:
    deg = np.asarray(topology).sum(axis=1)
    return sorted(range(len(deg)), key=lambda p: (-int(deg[p]), p))


def iter_induced_assignments(r: Request, testbed: TestbedTopology) -> Iterator[tuple[int, ...]]:
    """Yield assignments (position p -> testbed node) in deterministic DFS order."""
    n_r, n = r.n_nodes, testbed.n_nodes
    if n_r > n:
        return
    types = r.interface_types
    host_mask = testbed.nodes_with(types)
    if host_mask.bit_count() < n_r:
        return
    full = (1 << n) - 1
    nbr = [testbed.neighbor_masks(t) for t in types]
    # allowed[j] for an edge / non-edge to testbed node j, intersected over demanded types
    adj_ok = [full] * n
    non_ok = [full] * n
    for masks in nbr:
        for j in range(n):
            adj_ok[j] &= masks[j]
            non_ok[j] &= full & ~masks[j] & ~(1 << j)

    order = placement_order(r.topology)
    g = r.topology
    # for each depth, the earlier depths and whether the request has an edge to them
    constraints = [[(d, bool(g[order[k], order[d]])) for d in range(k)] for k in range(n_r)]
    placed = [0] * n_r
    assign = [0] * n_r

    def rec(k: int, used: int) -> Iterator[tuple[int, ...]]:
        cand = host_mask & ~used
        for d, linked in constraints[k]:
            cand &= adj_ok[placed[d]] if linked else non_ok[placed[d]]
            if not cand:
                return
        p = order[k]
        last = k == n_r - 1
        while cand:
            low = cand & -cand
            j = low.bit_length() - 1
            cand ^= low
            placed[k] = j
            assign[p] = j
            if last:
                yield tuple(assign)
            else:
                yield from rec(k + 1, used | low)

    yield from rec(0, 0)


def enumerate_induced_mappings(
    r: Request, testbed: TestbedTopology, limit: int | None = None
) -> list[PlacementMapping]:
    validate_request(r, testbed)
    if limit is not None and limit < 1:
        raise ValueError(f"limit must be a positive integer, got {limit}")
    it = iter_induced_assignments(r, testbed)
    if limit is not None:
        it = itertools.islice(it, limit)
    return [PlacementMapping(r.id, a) for a in it]


def candidate_array(r: Request, testbed: TestbedTopology, limit: int | None = None) -> np.ndarray:
    """Same enumeration as :func:`enumerate_induced_mappings`, packed as a (K, N_r) array."""
    validate_request(r, testbed)
    it = iter_induced_assignments(r, testbed)
    if limit is not None:
        it = itertools.islice(it, limit)
    flat = np.fromiter(itertools.chain.from_iterable(it), dtype=np.int32)
    return flat.reshape(-1, r.n_nodes)


def is_induced_placement(r: Request, testbed: TestbedTopology, assignment: Sequence[int]) -> bool:
    """Direct check of the placement invariants, one matrix lookup at a time."""
    if len(assignment) != r.n_nodes or len(set(assignment)) != len(assignment):
        return False
    if any(not 0 <= a < testbed.n_nodes for a in assignment):
        return False
    for t in r.interface_types:
        if not all(testbed.node_interfaces[a, t] for a in assignment):
            return False
        conn = testbed.connectivity[t]
        for p in range(r.n_nodes):
            for q in range(p + 1, r.n_nodes):
                if r.topology[p, q] != conn[assignment[p], assignment[q]]:
                    return False
    return True


def brute_force_induced_mappings(r: Request, testbed: TestbedTopology) -> list[PlacementMapping]:
    """Exhaustive oracle: every injective map, filtered by :func:`is_induced_placement`."""
    return [
        PlacementMapping(r.id, perm)
        for perm in itertools.permutations(range(testbed.n_nodes), r.n_nodes)
        if is_induced_placement(r, testbed, perm)
    ]
