"""Logical topology snapshots of a constellation at an instant."""

from typing import Dict, List, Tuple

from constellation.links import gsl_visible, isl_topology, link_latency_us
from constellation.models import ConstellationConfig, NodeId, Position
from constellation.orbits import ground_station_position, satellite_position
from topology.models import TopologySnapshot


def node_positions(config: ConstellationConfig, t: float) -> Dict[NodeId, Position]:
    """Positions of every node at time t, keyed by NodeId."""
    positions: Dict[NodeId, Position] = {}
    for node in config.node_ids():
        if not node.is_satellite:
            gs = config.ground_stations[node.station_index]
            positions[node] = ground_station_position(gs, t, config.constants)
        else:
            shell = config.shells[node.shell_index]
            positions[node] = satellite_position(
                shell, node.plane, node.slot, t, config.constants
            )
    return positions


def snapshot(config: ConstellationConfig, t: float) -> TopologySnapshot:
    """
    Logical topology of ``config`` at time ``t``.

    Nodes are all ground stations followed by all satellites. Edges are the
    +grid ISLs no longer than the shell's ``max_isl_length_km`` plus one GSL
    from each station to every satellite above its elevation mask.

    Args:
        config: Constellation configuration
        t: Seconds since epoch

    Returns:
        TopologySnapshot with latency from positions and bandwidth per link class
    """
    consts = config.constants
    nodes = config.node_ids()
    index = {node: i for i, node in enumerate(nodes)}
    positions = node_positions(config, t)
    edges: List[Tuple[int, int, int, int]] = []

    for shell_index, shell in enumerate(config.shells):
        for (pa, sa), (pb, sb) in isl_topology(shell):
            a = NodeId.satellite(shell_index, pa, sa)
            b = NodeId.satellite(shell_index, pb, sb)
            pos_a, pos_b = positions[a], positions[b]
            if (
                shell.max_isl_length_km is not None
                and pos_a.distance_to(pos_b) > shell.max_isl_length_km
            ):
                continue
            edges.append(
                (index[a], index[b], link_latency_us(pos_a, pos_b, consts), config.isl_bandwidth_kbps)
            )

    satellites = [node for node in nodes if node.is_satellite]
    for station_index, gs in enumerate(config.ground_stations):
        station = NodeId.ground_station(station_index, gs.name)
        gs_pos = positions[station]
        for sat in satellites:
            sat_pos = positions[sat]
            if gsl_visible(gs_pos, sat_pos, gs.min_elevation_rad, consts):
                edges.append(
                    (
                        index[station],
                        index[sat],
                        link_latency_us(gs_pos, sat_pos, consts),
                        config.gsl_bandwidth_kbps,
                    )
                )

    return TopologySnapshot.from_edges(len(nodes), edges, [node.name for node in nodes])
