"""Logical topology and full-mesh types."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, Optional, Sequence, Tuple

from utils.errors import TopologyError

UNLIMITED_BANDWIDTH = math.inf

Pair = Tuple[int, int]


@dataclass(frozen=True, order=True)
class Edge:
    """Undirected weighted edge between dense node indices, u < v."""

    u: int
    v: int
    latency_us: int
    bandwidth_kbps: int


@dataclass(frozen=True)
class TopologySnapshot:
    """
    Logical weighted graph at one instant.

    Attributes:
        node_count: Nodes are the dense indices 0..node_count-1
        edges: Sorted edges without self-loops or duplicate pairs
        labels: Optional node names, index-aligned
    """

    node_count: int
    edges: Tuple[Edge, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.node_count < 0:
            raise TopologyError("node_count must be >= 0")
        if self.labels and len(self.labels) != self.node_count:
            raise TopologyError("labels must be index-aligned with nodes")
        seen = set()
        for edge in self.edges:
            if edge.u == edge.v:
                raise TopologyError(f"self-loop on node {edge.u}")
            if not (0 <= edge.u < self.node_count and 0 <= edge.v < self.node_count):
                raise TopologyError(f"edge ({edge.u}, {edge.v}) references unknown node")
            key = (min(edge.u, edge.v), max(edge.u, edge.v))
            if key in seen:
                raise TopologyError(f"duplicate edge {key}")
            if edge.latency_us < 0 or edge.bandwidth_kbps <= 0:
                raise TopologyError(f"edge {key} has invalid weights")
            seen.add(key)

    @classmethod
    def from_edges(cls, node_count: int, edges, labels: Sequence[str] = ()) -> "TopologySnapshot":
        """Build a snapshot from (u, v, latency_us, bandwidth_kbps) tuples in any order."""
        normalized = sorted(
            Edge(min(u, v), max(u, v), int(lat), int(bw)) for u, v, lat, bw in edges
        )
        return cls(node_count, tuple(normalized), tuple(labels))

    def adjacency(self) -> Dict[int, Tuple[Tuple[int, int, int], ...]]:
        """Neighbours per node as (neighbour, latency_us, bandwidth_kbps), sorted."""
        adj: Dict[int, list] = {n: [] for n in range(self.node_count)}
        for edge in self.edges:
            adj[edge.u].append((edge.v, edge.latency_us, edge.bandwidth_kbps))
            adj[edge.v].append((edge.u, edge.latency_us, edge.bandwidth_kbps))
        return {n: tuple(sorted(neigh)) for n, neigh in adj.items()}


@dataclass(frozen=True)
class MeshLink:
    """State of one emulated machine-to-machine link."""

    reachable: bool
    latency_us: Optional[int] = None
    bandwidth_kbps: Optional[int] = None

    def __post_init__(self):
        if self.reachable:
            if self.latency_us is None or self.bandwidth_kbps is None:
                raise TopologyError("reachable mesh link needs latency and bandwidth")
        elif self.latency_us is not None or self.bandwidth_kbps is not None:
            raise TopologyError("unreachable mesh link must not carry latency or bandwidth")


UNREACHABLE = MeshLink(False)


@dataclass(frozen=True)
class MeshSnapshot:
    """
    Full mesh over a machine set.

    Machines are addressed by their position 0..m-1 in ``machines`` (the node
    indices they had in the logical snapshot). ``links`` holds one entry per
    unordered pair (a, b) with a < b; lookups are symmetric.
    """

    machines: Tuple[int, ...]
    links: Dict[Pair, MeshLink] = field(default_factory=dict)

    def __post_init__(self):
        m = len(self.machines)
        expected = m * (m - 1) // 2
        if len(self.links) != expected:
            raise TopologyError(f"mesh over {m} machines needs {expected} links, got {len(self.links)}")
        for a, b in self.links:
            if not 0 <= a < b < m:
                raise TopologyError(f"mesh pair ({a}, {b}) is not ordered or out of range")

    @property
    def machine_count(self) -> int:
        return len(self.machines)

    def link(self, a: int, b: int) -> MeshLink:
        if a == b:
            raise TopologyError("mesh has no diagonal entries")
        return self.links[(min(a, b), max(a, b))]

    def pairs(self) -> Iterator[Pair]:
        return iter(sorted(self.links))

    def __eq__(self, other) -> bool:
        if not isinstance(other, MeshSnapshot):
            return NotImplemented
        return self.machines == other.machines and self.links == other.links

    __hash__ = None


class ChangeKind(Enum):
    CREATED = "created"
    REMOVED = "removed"
    MODIFIED = "modified"


@dataclass(frozen=True)
class LinkUpdate:
    """One incremental change between two meshes; ``link`` is None for removals."""

    pair: Pair
    kind: ChangeKind
    link: Optional[MeshLink] = None
