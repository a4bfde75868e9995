"""Sink-side latency samples and their summaries."""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np
import structlog

from telemetry.clock import MessageStamp
from utils.errors import TelemetryError
from utils.text_utils import render_csv, save_text_to_file

logger = structlog.get_logger(__name__)

SAMPLES_CSV_HEADER = ["source", "seq", "raw_latency_us", "corrected_latency_us"]


@dataclass(frozen=True)
class LatencySample:
    source: str
    seq: int
    raw_latency_us: int
    corrected_latency_us: int

    @property
    def anomalous(self) -> bool:
        """A negative corrected latency points at bad clock synchronization."""
        return self.corrected_latency_us < 0


@dataclass(frozen=True)
class LatencySummary:
    count: int
    mean: float
    p50: float
    p95: float
    p99: float
    min: float
    max: float


def sink_latency(
    message: MessageStamp,
    sink_reading_us: int,
    source_offset_us: int = 0,
    sink_offset_us: int = 0,
) -> LatencySample:
    """
    Latency of one message evaluated at the sink.

    Args:
        message: Stamp carried by the message
        sink_reading_us: Sink clock reading at delivery
        source_offset_us: Estimated offset of the source clock
        sink_offset_us: Estimated offset of the sink clock

    Returns:
        LatencySample; corrected = raw - (sink offset - source offset)
    """
    raw = sink_reading_us - message.source_timestamp_us
    corrected = raw - (sink_offset_us - source_offset_us)
    sample = LatencySample(message.source, message.seq, raw, corrected)
    if sample.anomalous:
        logger.warning("negative_latency", source=message.source, seq=message.seq, corrected_us=corrected)
    return sample


def summarize(values: Iterable[float]) -> LatencySummary:
    """Mean, min, max and nearest-rank p50/p95/p99 of a non-empty sample set."""
    data = np.asarray(list(values), dtype=np.float64)
    if data.size == 0:
        raise TelemetryError("cannot summarize an empty sample set")
    p50, p95, p99 = np.percentile(data, [50, 95, 99], method="inverted_cdf")
    return LatencySummary(
        count=int(data.size),
        mean=float(data.mean()),
        p50=float(p50),
        p95=float(p95),
        p99=float(p99),
        min=float(data.min()),
        max=float(data.max()),
    )


def summarize_samples(samples: Sequence[LatencySample]) -> LatencySummary:
    return summarize(sample.corrected_latency_us for sample in samples)


def samples_csv(samples: Iterable[LatencySample]) -> str:
    rows: List[List[object]] = [
        [s.source, s.seq, s.raw_latency_us, s.corrected_latency_us] for s in samples
    ]
    return render_csv(SAMPLES_CSV_HEADER, rows)


def write_samples(samples: Iterable[LatencySample], output_path: Union[str, Path]) -> Path:
    return save_text_to_file(samples_csv(samples), output_path)
