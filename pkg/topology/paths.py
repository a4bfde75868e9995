"""Single-source shortest paths with deterministic tie-breaking."""

import heapq
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from topology.models import UNLIMITED_BANDWIDTH, TopologySnapshot
from utils.errors import TopologyError


@dataclass(frozen=True)
class PathResult:
    """
    Best path from a source to one node.

    ``bandwidth_kbps`` is the minimum edge bandwidth along ``path``
    (``UNLIMITED_BANDWIDTH`` for the source itself).
    """

    reachable: bool
    latency_us: Optional[int] = None
    bandwidth_kbps: Optional[float] = None
    path: Tuple[int, ...] = ()


def shortest_paths(
    snapshot: TopologySnapshot, source: int, adjacency: Optional[Dict] = None
) -> List[PathResult]:
    """
    Dijkstra over latency_us from ``source``.

    Among equal-latency paths the one whose node sequence is
    lexicographically smallest wins, which makes results reproducible.

    Args:
        snapshot: Logical topology
        source: Dense node index
        adjacency: Precomputed ``snapshot.adjacency()`` to reuse across sources

    Returns:
        One PathResult per node, indexed by node
    """
    if not 0 <= source < snapshot.node_count:
        raise TopologyError(f"unknown source node {source}")
    adj = adjacency if adjacency is not None else snapshot.adjacency()

    best: Dict[int, Tuple[int, Tuple[int, ...], float]] = {}
    done = set()
    queue = [(0, (source,), UNLIMITED_BANDWIDTH)]
    while queue:
        dist, path, bottleneck = heapq.heappop(queue)
        node = path[-1]
        if node in done:
            continue
        done.add(node)
        best[node] = (dist, path, bottleneck)
        for neighbour, latency, bandwidth in adj[node]:
            if neighbour in done:
                continue
            candidate = (dist + latency, path + (neighbour,))
            known = best.get(neighbour)
            if known is None or candidate < known[:2]:
                best[neighbour] = (candidate[0], candidate[1], min(bottleneck, bandwidth))
                heapq.heappush(queue, (candidate[0], candidate[1], min(bottleneck, bandwidth)))

    results = []
    for node in range(snapshot.node_count):
        if node in done:
            dist, path, bottleneck = best[node]
            results.append(PathResult(True, dist, bottleneck, path))
        else:
            results.append(PathResult(False))
    return results
