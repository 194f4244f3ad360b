"""Reservation requests and the randomized request generator."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .topology import TestbedTopology


class RequestError(ValueError):
    """A request violates its invariants or does not fit the testbed."""


class ChannelMode(str, Enum):
    FIXED = "fixed"
    FLEXIBLE = "flexible"


class NodeKind(str, Enum):
    PHYSICAL = "physical"
    VIRTUAL = "virtual"


@dataclass(frozen=True)
class ChannelDemand:
    interface_type: int
    mode: ChannelMode
    fixed_channels: tuple[int, ...] = ()
    flexible_count: int = 0

    @classmethod
    def fixed(cls, interface_type: int, channels: Sequence[int]) -> "ChannelDemand":
        return cls(interface_type, ChannelMode.FIXED, tuple(channels), 0)

    @classmethod
    def flexible(cls, interface_type: int, count: int) -> "ChannelDemand":
        return cls(interface_type, ChannelMode.FLEXIBLE, (), count)

    @property
    def slots(self) -> int:
        """Number of channels this demand occupies."""
        return len(self.fixed_channels) if self.mode is ChannelMode.FIXED else self.flexible_count


@dataclass(frozen=True, eq=False)
class Request:
    id: int
    n_nodes: int
    topology: np.ndarray
    demands: tuple[ChannelDemand, ...]
    node_kind: NodeKind = NodeKind.PHYSICAL
    duration_slots: int = 1
    priority_rank: int = 1

    def __post_init__(self):
        topo = np.asarray(self.topology, dtype=np.uint8)
        topo.setflags(write=False)
        object.__setattr__(self, "topology", topo)
        object.__setattr__(self, "demands", tuple(self.demands))
        object.__setattr__(self, "node_kind", NodeKind(self.node_kind))

    @property
    def interface_types(self) -> tuple[int, ...]:
        return tuple(d.interface_type for d in self.demands)

    @property
    def is_physical(self) -> bool:
        return self.node_kind is NodeKind.PHYSICAL

    def rejection_cost(self, w1: float = 1.0, w2: float = 1.0) -> float:
        return w1 / self.priority_rank + w2 * self.duration_slots

    def to_dict(self) -> dict:
        demands = []
        for d in self.demands:
            entry = {"interface_type": d.interface_type, "mode": d.mode.value}
            if d.mode is ChannelMode.FIXED:
                entry["fixed_channels"] = list(d.fixed_channels)
            else:
                entry["flexible_count"] = d.flexible_count
            demands.append(entry)
        return {
            "id": self.id,
            "n_nodes": self.n_nodes,
            "topology": self.topology.astype(int).tolist(),
            "demands": demands,
            "node_kind": self.node_kind.value,
            "duration_slots": self.duration_slots,
            "priority_rank": self.priority_rank,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Request":
        try:
            demands = []
            for d in data["demands"]:
                mode = ChannelMode(d["mode"])
                if mode is ChannelMode.FIXED:
                    demands.append(ChannelDemand.fixed(int(d["interface_type"]), [int(c) for c in d["fixed_channels"]]))
                else:
                    demands.append(ChannelDemand.flexible(int(d["interface_type"]), int(d["flexible_count"])))
            return cls(
                id=int(data["id"]),
                n_nodes=int(data["n_nodes"]),
                topology=np.array(data["topology"], dtype=np.int64),
                demands=tuple(demands),
                node_kind=NodeKind(data.get("node_kind", "physical")),
                duration_slots=int(data.get("duration_slots", 1)),
                priority_rank=int(data.get("priority_rank", 1)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise RequestError(f"malformed request: {exc}") from exc


def validate_request(r: Request, testbed: TestbedTopology) -> None:
    """Raise RequestError describing the first violated invariant."""
    g = r.topology
    if r.n_nodes < 1:
        raise RequestError(f"request {r.id}: n_nodes must be >= 1")
    if g.shape != (r.n_nodes, r.n_nodes):
        raise RequestError(f"request {r.id}: topology shape {g.shape} != ({r.n_nodes}, {r.n_nodes})")
    if np.any(g > 1):
        raise RequestError(f"request {r.id}: topology entries must be 0/1")
    if not np.array_equal(g, g.T):
        raise RequestError(f"request {r.id}: topology is not symmetric")
    if np.any(np.diag(g)):
        raise RequestError(f"request {r.id}: topology has a nonzero diagonal")
    if not r.demands:
        raise RequestError(f"request {r.id}: at least one interface demand is required")
    types = r.interface_types
    if len(set(types)) != len(types):
        raise RequestError(f"request {r.id}: duplicate interface types in demands")
    if r.duration_slots < 1:
        raise RequestError(f"request {r.id}: duration_slots must be >= 1")
    if not 1 <= r.priority_rank <= 5:
        raise RequestError(f"request {r.id}: priority_rank must be in [1, 5]")
    for d in r.demands:
        if not 0 <= d.interface_type < testbed.n_interface_types:
            raise RequestError(f"request {r.id}: interface type {d.interface_type} does not exist on the testbed")
        budget = testbed.max_channels(d.interface_type)
        if d.mode is ChannelMode.FIXED:
            chans = d.fixed_channels
            if not chans:
                raise RequestError(f"request {r.id}: fixed demand on interface {d.interface_type} lists no channels")
            if len(set(chans)) != len(chans):
                raise RequestError(f"request {r.id}: fixed channels on interface {d.interface_type} repeat")
            bad = [c for c in chans if not 0 <= c < budget]
            if bad:
                raise RequestError(
                    f"request {r.id}: fixed channel(s) {bad} outside [0, {budget}) on interface {d.interface_type}"
                )
        elif not 1 <= d.flexible_count <= budget:
            raise RequestError(
                f"request {r.id}: flexible_count {d.flexible_count} outside [1, {budget}] on interface {d.interface_type}"
            )


@dataclass
class GeneratorParams:
    min_nodes: int = 3
    max_nodes: int = 5
    topology_edge_prob: float = 0.5
    min_interfaces: int = 1
    max_interfaces: int = 3
    channel_mean_frac: float = 0.25
    channel_sd_frac: float = 1.0 / 6.0
    channel_cap_frac: float = 0.5
    duration_mean: float = 2.0
    duration_sd: float = 5.0
    min_priority: int = 1
    max_priority: int = 5
    node_kind: NodeKind = NodeKind.PHYSICAL

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorParams":
        data = dict(data)
        if "node_kind" in data:
            data["node_kind"] = NodeKind(data["node_kind"])
        return cls(**data)


def _flexible_count(rng: np.random.Generator, max_ch: int, p: GeneratorParams) -> int:
    cap = max(1, math.floor(max_ch * p.channel_cap_frac))
    x = rng.normal(p.channel_mean_frac * max_ch, p.channel_sd_frac * max_ch)
    return int(min(max(round(x), 1), cap))


def generate_requests(
    count: int,
    testbed: TestbedTopology,
    seed: int,
    params: GeneratorParams | None = None,
    first_id: int = 0,
) -> list[Request]:
    """Draw ``count`` random flexible-channel requests for ``testbed``.

    Every draw comes from one numpy Generator seeded with ``seed``, in a
    fixed per-request order, so the batch is a pure function of its inputs.
    """
    if count < 1:
        raise RequestError(f"count must be >= 1, got {count}")
    p = params or GeneratorParams()
    n_types = testbed.n_interface_types
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(p.min_nodes, p.max_nodes + 1))
        upper = np.triu(rng.random((n, n)) < p.topology_edge_prob, k=1)
        g = (upper | upper.T).astype(np.uint8)
        n_int = int(rng.integers(p.min_interfaces, p.max_interfaces + 1))
        n_int = min(max(n_int, 1), n_types)
        types = sorted(int(t) for t in rng.choice(n_types, size=n_int, replace=False))
        demands = tuple(
            ChannelDemand.flexible(t, _flexible_count(rng, testbed.max_channels(t), p)) for t in types
        )
        priority = int(rng.integers(p.min_priority, p.max_priority + 1))
        duration = max(1, int(round(rng.normal(p.duration_mean, p.duration_sd))))
        out.append(Request(first_id + k, n, g, demands, p.node_kind, duration, priority))
    return out


def load_requests(path: str | Path) -> list[Request]:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise RequestError(f"{path}: expected a JSON array of requests")
    reqs = [Request.from_dict(d) for d in data]
    if len({r.id for r in reqs}) != len(reqs):
        raise RequestError(f"{path}: request ids are not unique")
    return reqs


def save_requests(requests: Sequence[Request], path: str | Path) -> None:
    Path(path).write_text(json.dumps([r.to_dict() for r in requests], indent=1) + "\n")
