"""Fabric backends package for OrbitMesh."""

from .base import (
    DestKey,
    FabricBackend,
    LinkParams,
    Outcome,
    PacketEvent,
    ScheduleResult,
    serialization_us,
)
from .hash_backend import HashFabricBackend
from .scan_backend import ScanFabricBackend
from .factory import BACKEND_KINDS, create_backend
from .bench import SetupStats, bench_lookup, bench_setup
from .plan import emit_plan

__all__ = [
    'DestKey', 'FabricBackend', 'LinkParams', 'Outcome', 'PacketEvent', 'ScheduleResult',
    'serialization_us', 'HashFabricBackend', 'ScanFabricBackend', 'BACKEND_KINDS',
    'create_backend', 'SetupStats', 'bench_lookup', 'bench_setup', 'emit_plan',
]
