"""Link setup and lookup benchmarks for fabric backends."""

import gc
import math
import time
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
import structlog

from fabric_backends.base import DestKey, LinkParams, PacketEvent
from fabric_backends.factory import create_backend

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class SetupStats:
    """
    Timing summary in nanoseconds.

    ``durations_ns`` holds every timed operation over all repetitions;
    ``total_ns`` is the mean per-repetition total.
    """

    backend: str
    n: int
    repetitions: int
    durations_ns: Sequence[int]
    mean_ns: float
    p50_ns: int
    p99_ns: int
    total_ns: float

    @classmethod
    def from_durations(cls, backend: str, n: int, repetitions: int, durations: List[int]) -> "SetupStats":
        values = np.asarray(durations, dtype=np.int64)
        p50, p99 = np.percentile(values, [50, 99], method="inverted_cdf")
        return cls(
            backend=backend,
            n=n,
            repetitions=repetitions,
            durations_ns=tuple(durations),
            mean_ns=float(values.mean()),
            p50_ns=int(p50),
            p99_ns=int(p99),
            total_ns=float(values.sum()) / repetitions,
        )

    def as_row(self) -> List[object]:
        return [self.backend, self.n, f"{self.mean_ns:.1f}", self.p50_ns, self.p99_ns, f"{self.total_ns:.0f}"]


BENCH_CSV_HEADER = ["backend", "n", "mean_ns", "p50_ns", "p99_ns", "total_ns"]


def _bench_links(n: int) -> List[DestKey]:
    return [DestKey(s, t) for s in range(n) for t in range(n) if s != t]


def _bench_params(key: DestKey, n: int) -> LinkParams:
    return LinkParams(delay_us=1000 + (key.source * n + key.target) % 10_000, rate_kbps=100_000)


def bench_setup(kind: str, n: int, repetitions: int = 1, seed: int = 0) -> SetupStats:
    """
    Time ``set_link`` for all n*(n-1) ordered pairs on a fresh backend.

    Single-threaded, with the garbage collector paused, so timings are
    comparable across backends and sizes.

    Args:
        kind: Backend name ('hash' or 'scan')
        n: Machine count (>= 2)
        repetitions: Fresh-backend repetitions
        seed: Backend seed

    Returns:
        SetupStats over every timed set_link
    """
    if n < 2:
        raise ValueError(f"bench_setup needs n >= 2, got {n}")
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")

    links = _bench_links(n)
    params = [_bench_params(key, n) for key in links]
    durations: List[int] = []
    clock = time.perf_counter_ns

    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(repetitions):
            backend = create_backend(kind, seed=seed, machine_count=n)
            for key, value in zip(links, params):
                start = clock()
                backend.set_link(key, value)
                durations.append(clock() - start)
    finally:
        if gc_was_enabled:
            gc.enable()

    stats = SetupStats.from_durations(kind, n, repetitions, durations)
    logger.info("bench_setup", backend=kind, n=n, mean_ns=round(stats.mean_ns, 1), total_ns=stats.total_ns)
    return stats


def bench_lookup(kind: str, n: int, packets: int = 10_000, seed: int = 0) -> SetupStats:
    """Time ``schedule_packet`` against a fully populated n-machine table."""
    if n < 2:
        raise ValueError(f"bench_lookup needs n >= 2, got {n}")
    backend = create_backend(kind, seed=seed, machine_count=n)
    links = _bench_links(n)
    for key in links:
        backend.set_link(key, _bench_params(key, n))

    stride = max(1, len(links) // max(1, min(packets, len(links))))
    durations: List[int] = []
    clock = time.perf_counter_ns
    for i in range(packets):
        pkt = PacketEvent(links[(i * stride) % len(links)], 1500, i)
        start = clock()
        backend.schedule_packet(pkt)
        durations.append(clock() - start)
    return SetupStats.from_durations(kind, n, 1, durations)


def loglog_slope(sizes: Sequence[int], totals: Sequence[float]) -> float:
    """Least-squares slope of log(total) against log(n)."""
    if len(sizes) < 2:
        raise ValueError("need at least two sizes for a slope")
    xs = np.log([float(s) for s in sizes])
    ys = np.log([max(float(t), 1.0) for t in totals])
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope) if math.isfinite(slope) else float("nan")
