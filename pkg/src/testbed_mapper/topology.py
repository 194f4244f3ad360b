"""Physical testbed model: connectivity per interface type plus radio inventory."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


class TopologyError(ValueError):
    """Raised when a testbed description violates the model invariants."""


@dataclass(frozen=True)
class InterfaceType:
    id: int
    max_channels: int

    def __post_init__(self):
        if self.max_channels < 1:
            raise TopologyError(f"interface {self.id}: max_channels must be >= 1, got {self.max_channels}")


DEFAULT_INTERFACE_TYPES = (
    InterfaceType(0, 13),
    InterfaceType(1, 13),
    InterfaceType(2, 40),
)


@dataclass(frozen=True, eq=False)
class TestbedTopology:
    """A wireless testbed.

    ``connectivity`` has shape (I, N, N): one symmetric 0/1 matrix per
    interface type. ``node_interfaces`` has shape (N, I) and marks which
    radios each node carries.
    """

    __test__ = False  # not a pytest class

    n_nodes: int
    interface_types: tuple[InterfaceType, ...]
    connectivity: np.ndarray
    node_interfaces: np.ndarray

    def __post_init__(self):
        conn = np.asarray(self.connectivity, dtype=np.uint8)
        if conn.ndim == 2:
            conn = conn[None, :, :]
        ifaces = tuple(self.interface_types)
        n_types = len(ifaces)
        if self.node_interfaces is None:
            have = np.ones((self.n_nodes, n_types), dtype=bool)
        else:
            have = np.asarray(self.node_interfaces).astype(bool)
        conn.setflags(write=False)
        have.setflags(write=False)
        object.__setattr__(self, "connectivity", conn)
        object.__setattr__(self, "node_interfaces", have)
        object.__setattr__(self, "interface_types", ifaces)
        self._validate()

    def _validate(self) -> None:
        n, conn, have = self.n_nodes, self.connectivity, self.node_interfaces
        if n < 1:
            raise TopologyError("n_nodes must be >= 1")
        if not self.interface_types:
            raise TopologyError("at least one interface type is required")
        if [t.id for t in self.interface_types] != list(range(len(self.interface_types))):
            raise TopologyError("interface type ids must be contiguous from 0")
        if conn.shape != (len(self.interface_types), n, n):
            raise TopologyError(
                f"connectivity shape {conn.shape} does not match "
                f"({len(self.interface_types)}, {n}, {n})"
            )
        if have.shape != (n, len(self.interface_types)):
            raise TopologyError(f"node_interfaces shape {have.shape} does not match ({n}, {len(self.interface_types)})")
        if np.any(conn > 1):
            raise TopologyError("connectivity entries must be 0 or 1")
        for t in range(len(self.interface_types)):
            m = conn[t]
            if not np.array_equal(m, m.T):
                raise TopologyError(f"connectivity matrix for interface {t} is not symmetric")
            if np.any(np.diag(m)):
                raise TopologyError(f"connectivity matrix for interface {t} has a nonzero diagonal")
            j, k = np.nonzero(m)
            if not (have[j, t].all() and have[k, t].all()):
                raise TopologyError(f"interface {t} has links on nodes that lack that interface")

    @property
    def n_interface_types(self) -> int:
        return len(self.interface_types)

    def max_channels(self, t: int) -> int:
        return self.interface_types[t].max_channels

    def edge_count(self, t: int = 0) -> int:
        return int(self.connectivity[t].sum()) // 2

    def neighbor_masks(self, t: int) -> tuple[int, ...]:
        """Adjacency of interface ``t`` as one bitmask per node (bit k set if linked to k)."""
        masks = []
        for row in self.connectivity[t]:
            m = 0
            for k in np.flatnonzero(row):
                m |= 1 << int(k)
            masks.append(m)
        return tuple(masks)

    def nodes_with(self, types: Sequence[int]) -> int:
        """Bitmask of nodes carrying every interface type in ``types``."""
        ok = self.node_interfaces[:, list(types)].all(axis=1) if len(types) else np.ones(self.n_nodes, bool)
        m = 0
        for j in np.flatnonzero(ok):
            m |= 1 << int(j)
        return m

    def to_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "interface_types": [{"id": t.id, "max_channels": t.max_channels} for t in self.interface_types],
            "connectivity": self.connectivity.astype(int).tolist(),
            "node_interfaces": self.node_interfaces.astype(int).tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TestbedTopology":
        try:
            n = int(data["n_nodes"])
            types = tuple(
                InterfaceType(int(t["id"]), int(t["max_channels"]))
                for t in sorted(data["interface_types"], key=lambda t: t["id"])
            )
            conn = np.array(data["connectivity"], dtype=np.int64)
            have = data.get("node_interfaces")
        except (KeyError, TypeError, ValueError) as exc:
            raise TopologyError(f"malformed topology description: {exc}") from exc
        if conn.ndim != 3 or np.any((conn != 0) & (conn != 1)):
            raise TopologyError("connectivity must be a list of 0/1 matrices")
        if have is not None:
            have = np.array(have, dtype=np.int64)
            if np.any((have != 0) & (have != 1)):
                raise TopologyError("node_interfaces must be 0/1")
        return cls(n, types, conn, have)


def _replicate(adj: np.ndarray, interface_types: Sequence[InterfaceType]) -> TestbedTopology:
    types = tuple(interface_types)
    conn = np.repeat(adj[None, :, :], len(types), axis=0)
    return TestbedTopology(adj.shape[0], types, conn, None)


def build_grid(
    rows: int, cols: int, interface_types: Sequence[InterfaceType] = DEFAULT_INTERFACE_TYPES
) -> TestbedTopology:
    """4-neighbour rows x cols grid; node index is ``r * cols + c``."""
    if rows < 1 or cols < 1:
        raise TopologyError(f"grid dimensions must be positive, got {rows}x{cols}")
    n = rows * cols
    adj = np.zeros((n, n), dtype=np.uint8)
    for r in range(rows):
        for c in range(cols):
            j = r * cols + c
            if c + 1 < cols:
                adj[j, j + 1] = adj[j + 1, j] = 1
            if r + 1 < rows:
                adj[j, j + cols] = adj[j + cols, j] = 1
    return _replicate(adj, interface_types)


def build_random(
    n: int,
    edge_prob: float = 0.3,
    seed: int = 0,
    interface_types: Sequence[InterfaceType] = DEFAULT_INTERFACE_TYPES,
) -> TestbedTopology:
    """Independent-edge random graph; each unordered pair is linked with ``edge_prob``."""
    if n < 1:
        raise TopologyError(f"n must be >= 1, got {n}")
    if not 0.0 <= edge_prob <= 1.0:
        raise TopologyError(f"edge_prob must lie in [0, 1], got {edge_prob}")
    rng = np.random.default_rng(seed)
    draws = rng.random((n, n)) < edge_prob
    upper = np.triu(draws, k=1)
    adj = (upper | upper.T).astype(np.uint8)
    return _replicate(adj, interface_types)


def load_topology(path: str | Path) -> TestbedTopology:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise TopologyError(f"{path}: not valid JSON ({exc})") from exc
    return TestbedTopology.from_dict(data)


def save_topology(topo: TestbedTopology, path: str | Path) -> None:
    Path(path).write_text(json.dumps(topo.to_dict()) + "\n")


def eight_node_path() -> Path:
    """Location of the bundled 8-node planned testbed description."""
    return Path(__file__).with_name("data") / "crc8.json"
