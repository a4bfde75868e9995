"""Full-mesh reduction of a logical topology and incremental mesh diffs."""

from typing import Dict, Iterable, List, Sequence

import structlog

from topology.models import (
    UNREACHABLE,
    ChangeKind,
    LinkUpdate,
    MeshLink,
    MeshSnapshot,
    Pair,
    TopologySnapshot,
)
from topology.paths import shortest_paths
from utils.errors import TopologyError

logger = structlog.get_logger(__name__)


def reduce_full_mesh(snapshot: TopologySnapshot, machines: Sequence[int]) -> MeshSnapshot:
    """
    Reduce a logical topology to direct links between machines.

    Each machine pair inherits the summed latency and the minimum bandwidth
    of the latency-shortest logical path between them. Pairs without a path
    are unreachable.

    Args:
        snapshot: Logical topology
        machines: Dense node indices of the emulated machines, in machine order

    Returns:
        Mesh keyed by machine positions
    """
    machines = tuple(machines)
    if not machines:
        raise TopologyError("machine set must not be empty")
    if len(set(machines)) != len(machines):
        raise TopologyError("machine set contains duplicates")
    for node in machines:
        if not 0 <= node < snapshot.node_count:
            raise TopologyError(f"machine {node} is not a node of the snapshot")

    adjacency = snapshot.adjacency()
    links: Dict[Pair, MeshLink] = {}
    for a, source in enumerate(machines[:-1]):
        results = shortest_paths(snapshot, source, adjacency)
        for b in range(a + 1, len(machines)):
            result = results[machines[b]]
            if result.reachable:
                links[(a, b)] = MeshLink(True, result.latency_us, int(result.bandwidth_kbps))
            else:
                links[(a, b)] = UNREACHABLE
    logger.debug(
        "mesh_reduced",
        machines=len(machines),
        unreachable=sum(1 for link in links.values() if not link.reachable),
    )
    return MeshSnapshot(machines, links)


def diff(prev: MeshSnapshot, next_mesh: MeshSnapshot) -> List[LinkUpdate]:
    """
    Minimal update list turning ``prev`` into ``next_mesh``, ordered by pair.

    A pair becoming reachable is ``created``, becoming unreachable is
    ``removed``, and a change of latency or bandwidth is ``modified``.
    """
    if prev.machines != next_mesh.machines:
        raise TopologyError("cannot diff meshes over different machine sets")

    updates = []
    for pair in next_mesh.pairs():
        before, after = prev.links[pair], next_mesh.links[pair]
        if before == after:
            continue
        if not after.reachable:
            updates.append(LinkUpdate(pair, ChangeKind.REMOVED))
        elif not before.reachable:
            updates.append(LinkUpdate(pair, ChangeKind.CREATED, after))
        else:
            updates.append(LinkUpdate(pair, ChangeKind.MODIFIED, after))
    return updates


def apply_updates(prev: MeshSnapshot, updates: Iterable[LinkUpdate]) -> MeshSnapshot:
    """Apply a diff to a mesh, returning the resulting mesh."""
    links = dict(prev.links)
    for update in updates:
        if update.pair not in links:
            raise TopologyError(f"update for unknown pair {update.pair}")
        links[update.pair] = UNREACHABLE if update.kind is ChangeKind.REMOVED else update.link
    return MeshSnapshot(prev.machines, links)


def empty_mesh(machines: Sequence[int]) -> MeshSnapshot:
    """Mesh over ``machines`` with every pair unreachable."""
    machines = tuple(machines)
    m = len(machines)
    return MeshSnapshot(machines, {(a, b): UNREACHABLE for a in range(m) for b in range(a + 1, m)})
