"""Shared link table semantics and EDT packet scheduling for fabric backends."""

import threading
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, NamedTuple, Optional, Tuple

import numpy as np
import structlog

from utils.errors import FabricError, FabricOverflowError

logger = structlog.get_logger(__name__)

LOSS_PPM_MAX = 1_000_000
MAX_TIMESTAMP_US = 2 ** 63 - 1


class DestKey(NamedTuple):
    """Directed machine pair; the fabric of ``source`` shapes traffic to ``target``."""

    source: int
    target: int


@dataclass(frozen=True)
class LinkParams:
    """
    Per-destination link characteristics.

    Attributes:
        delay_us: Propagation delay in microseconds
        rate_kbps: Rate limit, None for unlimited
        loss_ppm: Loss probability in parts per million; 1e6 drops everything
    """

    delay_us: int
    rate_kbps: Optional[int] = None
    loss_ppm: int = 0

    def __post_init__(self):
        if int(self.delay_us) != self.delay_us or self.delay_us < 0:
            raise FabricError(f"delay_us must be a non-negative integer, got {self.delay_us}")
        if self.rate_kbps is not None and (int(self.rate_kbps) != self.rate_kbps or self.rate_kbps <= 0):
            raise FabricError(f"rate_kbps must be a positive integer or None, got {self.rate_kbps}")
        if int(self.loss_ppm) != self.loss_ppm or not 0 <= self.loss_ppm <= LOSS_PPM_MAX:
            raise FabricError(f"loss_ppm must be an integer in [0, {LOSS_PPM_MAX}], got {self.loss_ppm}")

    @classmethod
    def from_mesh_link(cls, link) -> "LinkParams":
        return cls(delay_us=link.latency_us, rate_kbps=link.bandwidth_kbps, loss_ppm=0)


class Outcome(Enum):
    DELIVERED = "delivered"
    DROPPED = "dropped"
    NO_ROUTE = "no_route"


@dataclass(frozen=True)
class PacketEvent:
    dest: DestKey
    size_bytes: int
    submit_time_us: int


@dataclass(frozen=True)
class ScheduleResult:
    """Departure and delivery are only set for delivered packets."""

    outcome: Outcome
    departure_time_us: Optional[int] = None
    delivery_time_us: Optional[int] = None


def serialization_us(size_bytes: int, rate_kbps: Optional[int]) -> int:
    """Transmission time of ``size_bytes`` at ``rate_kbps``, rounded half-up."""
    if rate_kbps is None:
        return 0
    quotient, remainder = divmod(size_bytes * 8 * 1000, rate_kbps)
    if 2 * remainder >= rate_kbps:
        quotient += 1
    return quotient


class FabricBackend:
    """
    Base class for fabric backends.

    Subclasses only decide how the destination table is stored and searched
    (``_store``, ``_discard``, ``_lookup``, ``_entries``); loss and EDT pacing
    are shared so that backends differ in cost, never in results.
    """

    kind = "base"

    def __init__(self, seed: int = 0, machine_count: Optional[int] = None):
        """
        Initialize the backend.

        Args:
            seed: Seed of the loss PRNG
            machine_count: Number of machines served, None if unconstrained
        """
        self.seed = seed
        self.machine_count = machine_count
        self._rng = np.random.default_rng(seed)
        self._last_departure: Dict[DestKey, int] = {}
        self._lock = threading.Lock()

    # storage hooks

    def _store(self, dest: DestKey, params: LinkParams) -> None:
        raise NotImplementedError

    def _discard(self, dest: DestKey) -> bool:
        raise NotImplementedError

    def _lookup(self, dest: DestKey) -> Optional[LinkParams]:
        raise NotImplementedError

    def _entries(self) -> Iterable[Tuple[DestKey, LinkParams]]:
        raise NotImplementedError

    # table operations

    def _check_dest(self, dest: DestKey) -> DestKey:
        dest = DestKey(*dest)
        if self.machine_count is not None:
            for machine in dest:
                if not 0 <= machine < self.machine_count:
                    raise FabricError(
                        f"machine {machine} outside backend range [0, {self.machine_count})"
                    )
        return dest

    def set_link(self, dest: DestKey, params: LinkParams) -> None:
        """Upsert ``dest -> params``; the last write wins."""
        if not isinstance(params, LinkParams):
            raise FabricError(f"expected LinkParams, got {type(params).__name__}")
        dest = self._check_dest(dest)
        with self._lock:
            self._store(dest, params)

    def remove_link(self, dest: DestKey) -> bool:
        """Remove ``dest``; returns whether it was present."""
        dest = self._check_dest(dest)
        with self._lock:
            self._last_departure.pop(dest, None)
            return self._discard(dest)

    def get_link(self, dest: DestKey) -> Optional[LinkParams]:
        with self._lock:
            return self._lookup(DestKey(*dest))

    def table(self) -> Dict[DestKey, LinkParams]:
        """Copy of the table, sorted by destination."""
        with self._lock:
            return dict(sorted(self._entries()))

    def __len__(self) -> int:
        with self._lock:
            return sum(1 for _ in self._entries())

    def snapshot_table(self) -> Dict[DestKey, LinkParams]:
        """Capture the table so a later ``restore_table`` can undo changes."""
        return self.table()

    def restore_table(self, saved: Dict[DestKey, LinkParams]) -> None:
        """Replace the whole table with a previously captured one."""
        with self._lock:
            for dest, _ in list(self._entries()):
                self._discard(dest)
            self._last_departure.clear()
            for dest, params in sorted(saved.items()):
                self._store(dest, params)

    # packet scheduling

    def schedule_packet(self, pkt: PacketEvent) -> ScheduleResult:
        """
        Schedule one packet under earliest-departure-time semantics.

        Loss is drawn before pacing, so a dropped packet takes no
        serialization slot. A delivered packet departs at
        max(submit, previous departure to the same destination) plus its
        serialization time and is delivered ``delay_us`` later.

        Args:
            pkt: Packet to schedule

        Returns:
            ScheduleResult
        """
        if pkt.size_bytes <= 0:
            raise FabricError(f"packet size must be > 0, got {pkt.size_bytes}")
        if pkt.submit_time_us < 0:
            raise FabricError(f"submit time must be >= 0, got {pkt.submit_time_us}")
        dest = DestKey(*pkt.dest)

        with self._lock:
            params = self._lookup(dest)
            if params is None:
                return ScheduleResult(Outcome.NO_ROUTE)
            if params.loss_ppm >= LOSS_PPM_MAX:
                return ScheduleResult(Outcome.DROPPED)
            if params.loss_ppm > 0 and self._rng.integers(LOSS_PPM_MAX) < params.loss_ppm:
                return ScheduleResult(Outcome.DROPPED)

            previous = self._last_departure.get(dest)
            start = pkt.submit_time_us if previous is None else max(pkt.submit_time_us, previous)
            departure = start + serialization_us(pkt.size_bytes, params.rate_kbps)
            delivery = departure + params.delay_us
            if delivery > MAX_TIMESTAMP_US:
                raise FabricOverflowError(
                    f"delivery time {delivery} us exceeds the 64-bit timestamp range"
                )
            self._last_departure[dest] = departure
            return ScheduleResult(Outcome.DELIVERED, departure, delivery)
