"""Satellite constellation simulation for OrbitMesh."""

from .models import (
    ConstellationConfig,
    GroundStation,
    NodeId,
    NodeKind,
    PhysicalConstants,
    Position,
    Shell,
)
from .orbits import (
    ground_station_position,
    orbital_period_s,
    orbital_speed_km_s,
    satellite_position,
    subpoint,
)
from .links import gsl_visible, isl_topology, link_latency_us
from .snapshot import node_positions, snapshot

__all__ = [
    'ConstellationConfig', 'GroundStation', 'NodeId', 'NodeKind', 'PhysicalConstants',
    'Position', 'Shell', 'ground_station_position', 'orbital_period_s', 'orbital_speed_km_s',
    'satellite_position', 'subpoint', 'gsl_visible', 'isl_topology', 'link_latency_us',
    'node_positions', 'snapshot',
]
