"""Tests for shortest paths, full-mesh reduction and mesh diffs."""

import random

import networkx as nx
import pytest

from topology import (
    UNREACHABLE,
    ChangeKind,
    MeshLink,
    MeshSnapshot,
    TopologySnapshot,
    apply_updates,
    diff,
    empty_mesh,
    reduce_full_mesh,
    shortest_paths,
)
from utils.errors import TopologyError


def random_connected_graph(rng: random.Random, n: int):
    """Random connected graph as (node_count, edges) with integer weights."""
    graph = nx.gnp_random_graph(n, rng.uniform(0.2, 0.7), seed=rng.randrange(2 ** 31))
    nodes = list(range(n))
    rng.shuffle(nodes)
    for a, b in zip(nodes, nodes[1:]):
        graph.add_edge(a, b)
    edges = [
        (u, v, rng.randint(0, 50), rng.choice([10, 20, 50, 100, 1000]))
        for u, v in sorted(graph.edges())
    ]
    return TopologySnapshot.from_edges(n, edges)


def oracle_link(snapshot: TopologySnapshot, source: int, target: int) -> MeshLink:
    """Exhaustive simple-path enumeration; ties go to the lexicographically smallest path."""
    graph = nx.Graph()
    graph.add_nodes_from(range(snapshot.node_count))
    for edge in snapshot.edges:
        graph.add_edge(edge.u, edge.v, latency=edge.latency_us, bandwidth=edge.bandwidth_kbps)
    best = None
    for path in nx.all_simple_paths(graph, source, target):
        hops = list(zip(path, path[1:]))
        latency = sum(graph[a][b]["latency"] for a, b in hops)
        bandwidth = min(graph[a][b]["bandwidth"] for a, b in hops)
        candidate = (latency, tuple(path), bandwidth)
        if best is None or candidate[:2] < best[:2]:
            best = candidate
    if best is None:
        return UNREACHABLE
    return MeshLink(True, best[0], best[2])


class TestShortestPaths:
    """Test cases for Dijkstra with tie-breaking."""

    def test_two_hop_chain(self):
        """Test the 10 ms/100 Mbps + 20 ms/50 Mbps chain."""
        snap = TopologySnapshot.from_edges(3, [(0, 1, 10_000, 100_000), (1, 2, 20_000, 50_000)])
        result = shortest_paths(snap, 0)[2]
        assert result.reachable
        assert result.latency_us == 30_000
        assert result.bandwidth_kbps == 50_000
        assert result.path == (0, 1, 2)

    def test_tie_prefers_smaller_path(self):
        """Test that equal-latency paths resolve to the smallest node sequence."""
        snap = TopologySnapshot.from_edges(
            4, [(0, 2, 5, 10), (2, 3, 5, 10), (0, 1, 5, 99), (1, 3, 5, 99)]
        )
        result = shortest_paths(snap, 0)[3]
        assert result.path == (0, 1, 3)
        assert result.bandwidth_kbps == 99

    def test_unreachable_node(self):
        """Test a node without any path."""
        snap = TopologySnapshot.from_edges(3, [(0, 1, 1, 1)])
        assert not shortest_paths(snap, 0)[2].reachable

    def test_unknown_source(self):
        """Test that an out-of-range source raises."""
        with pytest.raises(TopologyError):
            shortest_paths(TopologySnapshot.from_edges(2, []), 5)


class TestReduceFullMesh:
    """Test cases for full-mesh reduction."""

    def test_two_hop_instance(self):
        """Test the two-hop reduction to 30 ms / 50 Mbps."""
        snap = TopologySnapshot.from_edges(3, [(0, 1, 10_000, 100_000), (1, 2, 20_000, 50_000)])
        mesh = reduce_full_mesh(snap, [0, 2])
        assert mesh.link(0, 1) == MeshLink(True, 30_000, 50_000)

    def test_disconnected_pairs_unreachable(self):
        """Test that machines in different components are unreachable."""
        snap = TopologySnapshot.from_edges(4, [(0, 1, 3, 7), (2, 3, 4, 8)])
        mesh = reduce_full_mesh(snap, [0, 1, 2, 3])
        assert mesh.link(0, 1) == MeshLink(True, 3, 7)
        assert mesh.link(0, 2) == UNREACHABLE
        assert mesh.link(2, 3) == MeshLink(True, 4, 8)

    def test_single_machine(self):
        """Test that one machine gives an empty mesh."""
        mesh = reduce_full_mesh(TopologySnapshot.from_edges(2, [(0, 1, 1, 1)]), [1])
        assert mesh.links == {}

    def test_invalid_machine_sets(self):
        """Test empty, duplicate and unknown machine sets."""
        snap = TopologySnapshot.from_edges(2, [(0, 1, 1, 1)])
        for machines in ([], [0, 0], [0, 9]):
            with pytest.raises(TopologyError):
                reduce_full_mesh(snap, machines)

    def test_matches_simple_path_oracle(self):
        """Test 200 random connected graphs against exhaustive path enumeration."""
        rng = random.Random(2024)
        for _ in range(200):
            n = rng.randint(2, 10)
            snap = random_connected_graph(rng, n)
            machines = rng.sample(range(n), rng.randint(2, n))
            mesh = reduce_full_mesh(snap, machines)
            for a, b in mesh.pairs():
                assert mesh.link(a, b) == oracle_link(snap, machines[a], machines[b])

    def test_triangle_property(self):
        """Test that reduced latencies obey the triangle inequality."""
        rng = random.Random(7)
        for _ in range(30):
            n = rng.randint(3, 10)
            snap = random_connected_graph(rng, n)
            mesh = reduce_full_mesh(snap, list(range(n)))
            for a in range(n):
                for b in range(n):
                    for c in range(n):
                        if len({a, b, c}) < 3:
                            continue
                        assert mesh.link(a, c).latency_us <= (
                            mesh.link(a, b).latency_us + mesh.link(b, c).latency_us
                        )

    def test_adding_edge_never_increases_latency(self):
        """Test monotonicity under edge insertion."""
        rng = random.Random(11)
        for _ in range(30):
            n = rng.randint(3, 9)
            snap = random_connected_graph(rng, n)
            present = {(e.u, e.v) for e in snap.edges}
            missing = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in present]
            if not missing:
                continue
            u, v = rng.choice(missing)
            extra = [(e.u, e.v, e.latency_us, e.bandwidth_kbps) for e in snap.edges]
            extra.append((u, v, rng.randint(0, 50), 10))
            before = reduce_full_mesh(snap, list(range(n)))
            after = reduce_full_mesh(TopologySnapshot.from_edges(n, extra), list(range(n)))
            for pair in before.pairs():
                assert after.links[pair].latency_us <= before.links[pair].latency_us


class TestDiff:
    """Test cases for mesh diffs."""

    def test_kinds(self):
        """Test created, removed and modified classification."""
        prev = MeshSnapshot((0, 1, 2), {(0, 1): MeshLink(True, 1, 1), (0, 2): UNREACHABLE, (1, 2): MeshLink(True, 2, 2)})
        nxt = MeshSnapshot((0, 1, 2), {(0, 1): UNREACHABLE, (0, 2): MeshLink(True, 3, 3), (1, 2): MeshLink(True, 2, 5)})
        kinds = {u.pair: u.kind for u in diff(prev, nxt)}
        assert kinds == {
            (0, 1): ChangeKind.REMOVED,
            (0, 2): ChangeKind.CREATED,
            (1, 2): ChangeKind.MODIFIED,
        }

    def test_identical_meshes(self):
        """Test that equal meshes have an empty diff."""
        mesh = empty_mesh((0, 1, 2))
        assert diff(mesh, mesh) == []

    def test_round_trip(self):
        """Test apply_updates(prev, diff(prev, next)) == next on random meshes."""
        rng = random.Random(5)
        for _ in range(50):
            m = rng.randint(2, 8)

            def random_mesh():
                return MeshSnapshot(
                    tuple(range(m)),
                    {
                        (a, b): MeshLink(True, rng.randint(0, 3), rng.randint(1, 3))
                        if rng.random() < 0.7
                        else UNREACHABLE
                        for a in range(m)
                        for b in range(a + 1, m)
                    },
                )

            prev, nxt = random_mesh(), random_mesh()
            assert apply_updates(prev, diff(prev, nxt)) == nxt

    def test_different_machine_sets(self):
        """Test that diffing different machine sets raises."""
        with pytest.raises(TopologyError):
            diff(empty_mesh((0, 1)), empty_mesh((0, 2)))


if __name__ == "__main__":
    pytest.main([__file__])
