"""Tests for clock models, offset estimation and latency samples."""

import random

import numpy as np
import pytest

from fabric_backends import DestKey, LinkParams, Outcome, PacketEvent, create_backend
from telemetry import (
    ClockModel,
    SourceStamper,
    estimate_offset,
    samples_csv,
    simulate_exchange,
    sink_latency,
    stamp,
    summarize,
    summarize_samples,
    write_samples,
)
from telemetry.clock import MessageStamp
from utils.errors import TelemetryError


class TestClock:
    """Test cases for clock readings and stamping."""

    def test_perfect_clock(self):
        """Test that zero offset and drift read true time."""
        assert stamp(ClockModel(), 123_456) == 123_456

    def test_offset(self):
        """Test a fixed offset."""
        assert stamp(ClockModel(offset_us=500), 1000) == 1500

    def test_drift(self):
        """Test 100 ppm over one second."""
        assert stamp(ClockModel(drift_ppm=100), 1_000_000) == 1_000_100

    def test_monotone(self):
        """Test that readings never decrease for large negative drift."""
        clock = ClockModel(offset_us=-50, drift_ppm=-999_000)
        readings = [clock.reading(t) for t in range(0, 100_000, 997)]
        assert readings == sorted(readings)

    def test_invalid_drift(self):
        """Test that |drift| >= 1e6 ppm is rejected."""
        with pytest.raises(TelemetryError):
            ClockModel(drift_ppm=1_000_000)

    def test_negative_time(self):
        """Test that stamping before time zero raises."""
        with pytest.raises(TelemetryError):
            stamp(ClockModel(), -1)

    def test_stamper_sequences(self):
        """Test strictly increasing sequence numbers per source."""
        stamper = SourceStamper("sensor", ClockModel(offset_us=10))
        stamps = [stamper.stamp(t) for t in (0, 5, 9)]
        assert [s.seq for s in stamps] == [0, 1, 2]
        assert [s.source_timestamp_us for s in stamps] == [10, 15, 19]


class TestEstimateOffset:
    """Test cases for the two-way estimator."""

    def test_symmetric_exact(self):
        """Test exact recovery for offsets up to one second with symmetric delays."""
        rng = random.Random(1)
        local = ClockModel()
        for _ in range(500):
            theta = rng.randint(-1_000_000, 1_000_000)
            delay = rng.randint(0, 50_000)
            times = simulate_exchange(local, ClockModel(offset_us=theta), rng.randint(0, 10**9), delay, delay)
            assert estimate_offset(*times) == theta

    def test_zero_offset(self):
        """Test zero offset with symmetric delay."""
        assert estimate_offset(0, 100, 100, 200) == 0

    def test_asymmetric_error(self):
        """Test that the error is half the delay asymmetry."""
        times = simulate_exchange(ClockModel(), ClockModel(offset_us=1000), 0, 300, 100)
        assert estimate_offset(*times) - 1000 == (300 - 100) // 2

    def test_rounds_toward_zero(self):
        """Test truncation of odd sums."""
        assert estimate_offset(0, 3, 3, 2) == 2
        assert estimate_offset(0, -3, -3, 2) == -4
        assert estimate_offset(0, 0, 0, 1) == 0

    def test_bad_ordering(self):
        """Test violated timestamp ordering."""
        with pytest.raises(TelemetryError):
            estimate_offset(10, 0, 0, 5)
        with pytest.raises(TelemetryError):
            estimate_offset(0, 10, 5, 20)


class TestSinkLatency:
    """Test cases for corrected latencies."""

    def test_perfect_clocks(self):
        """Test that perfect clocks give the true latency."""
        sample = sink_latency(MessageStamp("s", 0, 1000), 1700)
        assert sample.raw_latency_us == sample.corrected_latency_us == 700

    def test_unsynchronized(self):
        """Test that zero estimates leave the raw latency."""
        sample = sink_latency(MessageStamp("s", 0, 2000), 1700)
        assert sample.corrected_latency_us == sample.raw_latency_us == -300
        assert sample.anomalous

    def test_source_offset_corrected(self):
        """Test that a perfectly estimated source offset is removed."""
        source = ClockModel(offset_us=1000)
        message = MessageStamp("s", 0, stamp(source, 5000))
        sample = sink_latency(message, 5400, source_offset_us=1000, sink_offset_us=0)
        assert sample.raw_latency_us == -600
        assert sample.corrected_latency_us == 400
        assert not sample.anomalous

    def test_end_to_end_through_fabric(self):
        """Test 1,000 messages with random clocks against the fabric's scheduled latency."""
        rng = random.Random(8)
        reference = ClockModel()
        backend = create_backend("hash", seed=3)
        backend.set_link(DestKey(0, 1), LinkParams(12_000, 20_000))
        sink_clock = ClockModel(offset_us=rng.randint(-1_000_000, 1_000_000))
        sink_estimate = estimate_offset(*simulate_exchange(reference, sink_clock, 0, 700, 700))
        now = 0
        for seq in range(1000):
            source_clock = ClockModel(offset_us=rng.randint(-1_000_000, 1_000_000))
            source_estimate = estimate_offset(*simulate_exchange(reference, source_clock, now, 900, 900))
            now += rng.randint(0, 2000)
            message = MessageStamp("src", seq, stamp(source_clock, now))
            result = backend.schedule_packet(PacketEvent(DestKey(0, 1), rng.randint(64, 1500), now))
            assert result.outcome is Outcome.DELIVERED
            sample = sink_latency(message, sink_clock.reading(result.delivery_time_us), source_estimate, sink_estimate)
            assert abs(sample.corrected_latency_us - (result.delivery_time_us - now)) <= 1


class TestSummarize:
    """Test cases for latency summaries."""

    def test_single_sample(self):
        """Test that one sample fills every statistic."""
        summary = summarize([42])
        assert (summary.mean, summary.p50, summary.p95, summary.p99, summary.min, summary.max) == (
            42, 42, 42, 42, 42, 42,
        )

    def test_nearest_rank(self):
        """Test 1..100 percentiles."""
        summary = summarize(range(1, 101))
        assert summary.p50 == 50
        assert summary.p95 == 95
        assert summary.p99 == 99

    def test_matches_sort_oracle_and_permutation(self):
        """Test random sets against a sort-based nearest-rank oracle."""
        rng = random.Random(4)
        for _ in range(50):
            values = [rng.randint(-100, 10_000) for _ in range(rng.randint(1, 300))]
            ordered = sorted(values)

            def rank(p):
                return ordered[max(0, int(np.ceil(p / 100 * len(ordered))) - 1)]

            summary = summarize(values)
            assert (summary.p50, summary.p95, summary.p99) == (rank(50), rank(95), rank(99))
            rng.shuffle(values)
            assert summarize(values) == summary

    def test_empty(self):
        """Test that an empty set raises."""
        with pytest.raises(TelemetryError):
            summarize([])


class TestSamplesCsv:
    """Test cases for the samples CSV."""

    def test_csv(self, tmp_path):
        """Test header, rows and file output."""
        samples = [sink_latency(MessageStamp("a", i, 0), 10 + i) for i in range(2)]
        text = samples_csv(samples)
        assert text == "source,seq,raw_latency_us,corrected_latency_us\na,0,10,10\na,1,11,11\n"
        assert write_samples(samples, tmp_path / "s.csv").read_text() == text
        assert summarize_samples(samples).max == 11


if __name__ == "__main__":
    pytest.main([__file__])
