"""Clock models, source stamping and two-way offset estimation."""

import math
import threading
from dataclasses import dataclass
from typing import Tuple

from utils.errors import TelemetryError

PPM = 1_000_000


@dataclass(frozen=True)
class ClockModel:
    """
    A machine clock relative to true time.

    Attributes:
        offset_us: Signed offset in microseconds
        drift_ppm: Signed drift in parts per million, |drift_ppm| < 1e6
    """

    offset_us: int = 0
    drift_ppm: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.drift_ppm) and abs(self.drift_ppm) < PPM):
            raise TelemetryError(f"drift_ppm must be within (-1e6, 1e6), got {self.drift_ppm}")

    def reading(self, true_time_us: int) -> int:
        """Clock reading at true time t: t + offset + t * drift / 1e6 (rounded half-up)."""
        drift = int(math.floor(true_time_us * self.drift_ppm / PPM + 0.5))
        return true_time_us + self.offset_us + drift


@dataclass(frozen=True)
class MessageStamp:
    source: str
    seq: int
    source_timestamp_us: int


def stamp(clock: ClockModel, true_time_us: int) -> int:
    if true_time_us < 0:
        raise TelemetryError(f"true time must be >= 0, got {true_time_us}")
    return clock.reading(true_time_us)


class SourceStamper:
    """Stamps outgoing messages of one source with increasing sequence numbers."""

    def __init__(self, source: str, clock: ClockModel):
        self.source = source
        self.clock = clock
        self._next_seq = 0
        self._lock = threading.Lock()

    def stamp(self, true_time_us: int) -> MessageStamp:
        timestamp = stamp(self.clock, true_time_us)
        with self._lock:
            seq = self._next_seq
            self._next_seq += 1
        return MessageStamp(self.source, seq, timestamp)


def estimate_offset(t1: int, t2: int, t3: int, t4: int) -> int:
    """
    Two-way offset estimate of a remote clock against the local one.

    Args:
        t1: Request sent (local clock)
        t2: Request received (remote clock)
        t3: Response sent (remote clock)
        t4: Response received (local clock)

    Returns:
        ((t2 - t1) + (t3 - t4)) / 2, rounded toward zero
    """
    if t4 < t1:
        raise TelemetryError(f"response received ({t4}) before request sent ({t1})")
    if t3 < t2:
        raise TelemetryError(f"response sent ({t3}) before request received ({t2})")
    total = (t2 - t1) + (t3 - t4)
    half = abs(total) // 2
    return half if total >= 0 else -half


def simulate_exchange(
    local: ClockModel,
    remote: ClockModel,
    t1_true_us: int,
    forward_us: int,
    back_us: int,
    processing_us: int = 0,
) -> Tuple[int, int, int, int]:
    """Timestamps (t1, t2, t3, t4) of one request/response exchange between two clocks."""
    if min(t1_true_us, forward_us, back_us, processing_us) < 0:
        raise TelemetryError("exchange times and delays must be >= 0")
    received = t1_true_us + forward_us
    replied = received + processing_us
    return (
        local.reading(t1_true_us),
        remote.reading(received),
        remote.reading(replied),
        local.reading(replied + back_us),
    )
