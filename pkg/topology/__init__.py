"""Logical topologies, shortest paths and full-mesh reduction."""

from .models import (
    UNLIMITED_BANDWIDTH,
    UNREACHABLE,
    ChangeKind,
    Edge,
    LinkUpdate,
    MeshLink,
    MeshSnapshot,
    TopologySnapshot,
)
from .paths import PathResult, shortest_paths
from .mesh import apply_updates, diff, empty_mesh, reduce_full_mesh

__all__ = [
    'UNLIMITED_BANDWIDTH', 'UNREACHABLE', 'ChangeKind', 'Edge', 'LinkUpdate', 'MeshLink',
    'MeshSnapshot', 'TopologySnapshot', 'PathResult', 'shortest_paths', 'apply_updates',
    'diff', 'empty_mesh', 'reduce_full_mesh',
]
