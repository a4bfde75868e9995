"""Trace generation and replay for OrbitMesh."""

from .trace import (
    LinkRecord,
    Trace,
    TraceHeader,
    check_trace_matches,
    generate_trace,
    parse_trace_text,
    read_trace,
    render_trace,
    validate_trace,
    write_trace,
)
from .replay import ClockMode, EpochReport, ReplayReport, apply_link_updates, replay, sync_updates

__all__ = [
    'LinkRecord', 'Trace', 'TraceHeader', 'check_trace_matches', 'generate_trace',
    'parse_trace_text', 'read_trace', 'render_trace', 'validate_trace', 'write_trace',
    'ClockMode', 'EpochReport', 'ReplayReport', 'apply_link_updates', 'replay',
    'sync_updates',
]
