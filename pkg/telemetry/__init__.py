"""Source-to-sink latency measurement over imperfect clocks."""

from .clock import ClockModel, MessageStamp, SourceStamper, estimate_offset, simulate_exchange, stamp
from .latency import (
    SAMPLES_CSV_HEADER,
    LatencySample,
    LatencySummary,
    samples_csv,
    sink_latency,
    summarize,
    summarize_samples,
    write_samples,
)

__all__ = [
    'ClockModel', 'MessageStamp', 'SourceStamper', 'estimate_offset', 'simulate_exchange',
    'stamp', 'SAMPLES_CSV_HEADER', 'LatencySample', 'LatencySummary', 'samples_csv',
    'sink_latency', 'summarize', 'summarize_samples', 'write_samples',
]
