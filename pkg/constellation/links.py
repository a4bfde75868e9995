"""Inter-satellite and ground-station link geometry."""

import math
from typing import List, Tuple

import numpy as np

from constellation.models import PhysicalConstants, Position, Shell
from utils.errors import ConstellationError

SatIndex = Tuple[int, int]  # (plane, slot)
IslEdge = Tuple[SatIndex, SatIndex]


def isl_topology(shell: Shell) -> List[IslEdge]:
    """
    +grid inter-satellite links of a shell.

    Every satellite links to both intra-plane neighbours and to the same slot
    in both adjacent planes. Self-loops and duplicates (small P or S) are
    dropped. Length limits are applied later, per snapshot.

    Args:
        shell: Shell to wire

    Returns:
        Sorted undirected edges, each as ((plane, slot), (plane, slot)) with
        the smaller endpoint first
    """
    planes, sats = shell.planes, shell.sats_per_plane
    edges = set()
    for plane in range(planes):
        for slot in range(sats):
            here = (plane, slot)
            for there in ((plane, (slot + 1) % sats), ((plane + 1) % planes, slot)):
                if there != here:
                    edges.add((min(here, there), max(here, there)))
    return sorted(edges)


def gsl_visible(
    gs_pos: Position, sat_pos: Position, min_elevation_rad: float, consts: PhysicalConstants
) -> bool:
    """
    Whether a satellite is above a station's elevation mask.

    Elevation is 90 degrees minus the angle between the station zenith and
    the station-to-satellite vector.
    """
    zenith = gs_pos.as_array()
    zenith_norm = np.linalg.norm(zenith)
    if zenith_norm == 0.0:
        raise ConstellationError("ground station position is at the Earth center")
    line_of_sight = sat_pos.as_array() - zenith
    distance = np.linalg.norm(line_of_sight)
    if distance == 0.0:
        raise ConstellationError("ground station and satellite positions coincide")
    sin_elevation = float(np.dot(zenith / zenith_norm, line_of_sight / distance))
    elevation = math.asin(max(-1.0, min(1.0, sin_elevation)))
    return elevation >= min_elevation_rad


def link_latency_us(a: Position, b: Position, consts: PhysicalConstants) -> int:
    """Free-space propagation delay, rounded half-up to whole microseconds."""
    latency = a.distance_to(b) / consts.light_speed_km_s * 1e6
    return int(math.floor(latency + 0.5))
