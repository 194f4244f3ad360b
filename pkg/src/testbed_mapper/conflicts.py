"""Resource and channel conflict accounting for a set of served placements.

A resource unit is a (node, interface type) pair. Virtual requests claim the
demanded interface units on each hosting node; physical requests claim every
unit present on the node. Each unit contributes ``claimants - 1`` conflicts.

Channels are a global pool per interface type. Distinct fixed channels take
identified slots, flexible demands take anonymous ones; repeated fixed
channels and demand above the type's budget both count as conflicts.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .isomorphism import PlacementMapping
from .request import ChannelMode, Request
from .topology import TestbedTopology

WHOLE_NODE = "whole_node"


@dataclass(frozen=True)
class ResourceClaim:
    request_id: int
    node: int
    claimed_interfaces: frozenset[int] | str

    def units(self, testbed: TestbedTopology) -> list[tuple[int, int]]:
        if self.claimed_interfaces == WHOLE_NODE:
            ifaces = [t for t in range(testbed.n_interface_types) if testbed.node_interfaces[self.node, t]]
        else:
            ifaces = sorted(self.claimed_interfaces)
        return [(self.node, t) for t in ifaces]


@dataclass(frozen=True)
class ConflictReport:
    resource_conflicts: int = 0
    channel_conflicts: int = 0

    @property
    def total(self) -> int:
        return self.resource_conflicts + self.channel_conflicts


def claims_of(r: Request, m: PlacementMapping) -> list[ResourceClaim]:
    if r.is_physical:
        return [ResourceClaim(r.id, node, WHOLE_NODE) for node in m.assignment]
    ifaces = frozenset(r.interface_types)
    return [ResourceClaim(r.id, node, ifaces) for node in m.assignment]


def count_resource_conflicts(active: Iterable[tuple[Request, PlacementMapping]], testbed: TestbedTopology) -> int:
    claimants: Counter[tuple[int, int]] = Counter()
    for r, m in active:
        for claim in claims_of(r, m):
            claimants.update(claim.units(testbed))
    return sum(c - 1 for c in claimants.values() if c > 1)


def count_channel_conflicts(requests: Iterable[Request], testbed: TestbedTopology) -> int:
    fixed: list[Counter[int]] = [Counter() for _ in range(testbed.n_interface_types)]
    flexible = [0] * testbed.n_interface_types
    for r in requests:
        for d in r.demands:
            if d.mode is ChannelMode.FIXED:
                fixed[d.interface_type].update(d.fixed_channels)
            else:
                flexible[d.interface_type] += d.flexible_count
    total = 0
    for t in range(testbed.n_interface_types):
        total += sum(c - 1 for c in fixed[t].values() if c > 1)
        demand = len(fixed[t]) + flexible[t]
        total += max(0, demand - testbed.max_channels(t))
    return total


def count_conflicts(active: Sequence[tuple[Request, PlacementMapping]], testbed: TestbedTopology) -> ConflictReport:
    return ConflictReport(
        count_resource_conflicts(active, testbed),
        count_channel_conflicts((r for r, _ in active), testbed),
    )


def claim_mask(r: Request, assignment: Sequence[int], testbed: TestbedTopology) -> int:
    """Bitmask over resource units; bit ``node * I + t`` is unit (node, t)."""
    n_types = testbed.n_interface_types
    have = testbed.node_interfaces
    types = range(n_types) if r.is_physical else r.interface_types
    mask = 0
    for node in assignment:
        base = int(node) * n_types
        for t in types:
            if have[node, t]:
                mask |= 1 << (base + t)
    return mask


def masked_resource_conflicts(masks: Iterable[int]) -> int:
    """Resource conflicts from unit bitmasks: claims made minus distinct units touched."""
    union = 0
    claimed = 0
    for m in masks:
        union |= m
        claimed += m.bit_count()
    return claimed - union.bit_count()


def assign_channels(requests: Sequence[Request], testbed: TestbedTopology) -> dict[int, dict[int, list[int]]]:
    """Concrete channels for a conflict-free set: fixed channels first, then
    flexible demands in request order take the lowest free indices.

    Returns ``{request_id: {interface_type: [channels]}}``. Raises ValueError
    when the set has channel conflicts.
    """
    if count_channel_conflicts(requests, testbed):
        raise ValueError("channel demands conflict; no collision-free assignment exists")
    used: list[set[int]] = [set() for _ in range(testbed.n_interface_types)]
    out: dict[int, dict[int, list[int]]] = {r.id: {} for r in requests}
    for r in requests:
        for d in r.demands:
            if d.mode is ChannelMode.FIXED:
                used[d.interface_type].update(d.fixed_channels)
                out[r.id][d.interface_type] = sorted(d.fixed_channels)
    for r in requests:
        for d in r.demands:
            if d.mode is ChannelMode.FLEXIBLE:
                taken = used[d.interface_type]
                free = (c for c in range(testbed.max_channels(d.interface_type)) if c not in taken)
                chans = [next(free) for _ in range(d.flexible_count)]
                taken.update(chans)
                out[r.id][d.interface_type] = chans
    return out
