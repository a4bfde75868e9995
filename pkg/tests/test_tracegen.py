"""Tests for trace generation, validation and replay."""

import math
import random

import pytest

from constellation import ConstellationConfig, GroundStation, orbital_period_s, snapshot
from fabric_backends import DestKey, LinkParams, create_backend
from tracegen import (
    ClockMode,
    check_trace_matches,
    generate_trace,
    parse_trace_text,
    read_trace,
    render_trace,
    replay,
    validate_trace,
    write_trace,
)
from tracegen.replay import mesh_from_backend, sync_updates
from tracegen.trace import Trace, TraceHeader, epoch_count
from utils.config_utils import parse_config
from utils.errors import FabricError, TraceFormatError, TraceIOError

HASH = "0" * 64


def small_config(step_s=10.0, duration_s=30.0, stations=True, seed=0):
    document = {
        "shells": [
            {"planes": 3, "sats_per_plane": 3, "altitude_km": 550, "inclination_deg": 53, "phasing_factor": 1}
        ],
        "trace": {"step_s": step_s, "duration_s": duration_s},
        "fabric": {"seed": seed},
    }
    if stations:
        document["ground_stations"] = [
            {"name": "north", "latitude_deg": 45.0, "longitude_deg": 10.0},
            {"name": "south", "latitude_deg": -30.0, "longitude_deg": 140.0, "min_elevation_deg": 10},
        ]
    return parse_config(document)


def random_config(rng: random.Random):
    planes = rng.randint(1, 4)
    document = {
        "shells": [
            {
                "planes": planes,
                "sats_per_plane": rng.randint(1, 4),
                "altitude_km": rng.uniform(500, 1500),
                "inclination_deg": rng.uniform(0, 180),
                "phasing_factor": rng.randrange(planes),
            }
        ],
        "ground_stations": [
            {"name": f"gs{i}", "latitude_deg": rng.uniform(-80, 80), "longitude_deg": rng.uniform(-179, 179),
             "min_elevation_deg": rng.uniform(0, 30)}
            for i in range(rng.randint(0, 2))
        ],
        "trace": {"step_s": 120, "duration_s": 600},
    }
    return parse_config(document)


def trace_text(lines):
    return "\n".join(lines) + "\n"


HEADER = f"#orbitmesh-trace v1 config={HASH} machines=3 step_s=1 epochs=1"
COLUMNS = "epoch,source,target,reachable,latency_us,bandwidth_kbps"


class TestGenerateTrace:
    """Test cases for trace generation."""

    def test_deterministic_bytes(self):
        """Test that two generations are byte-identical."""
        config = small_config()
        assert render_trace(generate_trace(config)) == render_trace(generate_trace(config))

    def test_epoch_count_and_records(self):
        """Test epochs at 0, 10, 20 and one record per pair."""
        config = small_config()
        trace = generate_trace(config)
        m = len(config.machines)
        assert trace.header.epochs == 3
        assert trace.header.machines == m == 11
        assert all(len(records) == m * (m - 1) // 2 for records in trace.epochs)

    def test_header_line(self):
        """Test the header format."""
        trace = generate_trace(small_config())
        first = render_trace(trace).split("\n")[0]
        assert first == (
            f"#orbitmesh-trace v1 config={small_config().config_hash()} machines=11 step_s=10 epochs=3"
        )

    def test_duration_below_step(self):
        """Test that duration < step raises."""
        with pytest.raises(ValueError):
            generate_trace(small_config(), duration_s=5.0, step_s=10.0)

    def test_periodic_without_stations(self):
        """Test that with step = period, consecutive epochs carry identical meshes."""
        config = small_config(stations=False)
        period = orbital_period_s(config.constellation.shells[0], config.constellation.constants)
        trace = generate_trace(config, duration_s=2 * period, step_s=period)
        assert trace.header.epochs == 2
        assert trace.mesh(0) == trace.mesh(1)

    def test_epoch_count(self):
        """Test that every epoch strictly before the duration is generated."""
        assert epoch_count(10.0, 10.0) == 1
        assert epoch_count(2.5, 1.0) == 3
        assert epoch_count(3.0, 1.0) == 3
        assert epoch_count(0.3, 0.1) == 3
        assert epoch_count(5731.0, 10.0) == 574

    def test_duration_equals_step(self):
        """Test that duration == step gives exactly one epoch."""
        assert generate_trace(small_config(), duration_s=10.0, step_s=10.0).header.epochs == 1

    def test_periodic_closure_with_station(self):
        """Test one orbit of a 3x3 shell with a station closes within one step."""
        document = {
            "shells": [
                {"planes": 3, "sats_per_plane": 3, "altitude_km": 550, "inclination_deg": 53, "phasing_factor": 1}
            ],
            "ground_stations": [
                {"name": "gs", "latitude_deg": 20.0, "longitude_deg": 30.0, "min_elevation_deg": 0}
            ],
        }
        config = parse_config(document)
        constellation = config.constellation
        consts = constellation.constants
        period = orbital_period_s(constellation.shells[0], consts)
        trace = generate_trace(config, duration_s=5731.0, step_s=10.0)
        last_t = trace.epoch_time_s(trace.header.epochs - 1)
        assert trace.header.epochs == 574
        assert 0 <= period - last_t < 10.0

        def isl(snap):
            return {(e.u, e.v): e.latency_us for e in snap.edges if e.u >= 1}

        def gsl(snap):
            return {(e.u, e.v): e.latency_us for e in snap.edges if e.u == 0}

        first, last = isl(snapshot(constellation, 0.0)), isl(snapshot(constellation, last_t))
        assert first.keys() == last.keys()
        assert all(abs(first[pair] - last[pair]) <= 10 for pair in first)

        station = constellation.ground_stations[0]
        lon = (station.longitude_rad + consts.earth_rotation_rad_s * period + math.pi) % (2 * math.pi) - math.pi
        rotated = ConstellationConfig(
            shells=constellation.shells,
            ground_stations=(GroundStation("gs", station.latitude_rad, lon, station.min_elevation_rad),),
            constants=consts,
        )
        closed, oracle = gsl(snapshot(constellation, period)), gsl(snapshot(rotated, 0.0))
        assert closed.keys() == oracle.keys()
        assert all(abs(closed[pair] - oracle[pair]) <= 1 for pair in closed)

    def test_trace_parses_back(self):
        """Test that generated text validates and equals the trace."""
        trace = generate_trace(small_config())
        parsed, violations = parse_trace_text(render_trace(trace))
        assert violations == []
        assert parsed == trace


class TestValidateTrace:
    """Test cases for trace validation."""

    def codes(self, text):
        _, violations = parse_trace_text(text)
        return {v.code for v in violations}

    def test_valid_minimal(self):
        """Test a minimal valid trace."""
        text = trace_text([HEADER, COLUMNS, "0,0,1,1,100,5", "0,0,2,0,,", "0,1,2,1,0,7"])
        assert self.codes(text) == set()

    def test_crlf_rejected(self):
        """Test that CR line endings are reported."""
        text = trace_text([HEADER, COLUMNS, "0,0,1,1,100,5", "0,0,2,0,,", "0,1,2,1,0,7"]).replace("\n", "\r\n")
        assert "line-ending" in self.codes(text)

    def test_bad_header(self):
        """Test a malformed header."""
        assert self.codes(trace_text(["#trace", COLUMNS])) == {"header-malformed"}

    def test_empty_file(self):
        """Test an empty file."""
        assert self.codes("") == {"header-missing"}

    def test_unreachable_with_values(self):
        """Test reachable=0 rows carrying values."""
        text = trace_text([HEADER, COLUMNS, "0,0,1,0,100,5", "0,0,2,0,,", "0,1,2,1,0,7"])
        assert "unreachable-with-values" in self.codes(text)

    def test_reachable_missing_values(self):
        """Test reachable=1 rows without values."""
        text = trace_text([HEADER, COLUMNS, "0,0,1,1,,", "0,0,2,0,,", "0,1,2,1,0,7"])
        assert "reachable-missing-values" in self.codes(text)

    def test_pair_order_and_range(self):
        """Test source >= target and machine range."""
        text = trace_text([HEADER, COLUMNS, "0,1,0,1,1,1", "0,0,3,1,1,1"])
        codes = self.codes(text)
        assert {"pair-order", "machine-range", "epoch-incomplete"} <= codes

    def test_record_order(self):
        """Test out-of-order records."""
        text = trace_text([HEADER, COLUMNS, "0,0,2,0,,", "0,0,1,1,100,5", "0,1,2,1,0,7"])
        assert "record-order" in self.codes(text)

    def test_trailing_space(self):
        """Test trailing whitespace."""
        text = trace_text([HEADER, COLUMNS, "0,0,1,1,100,5 ", "0,0,2,0,,", "0,1,2,1,0,7"])
        assert self.codes(text) == {"trailing-space"}

    def test_field_count(self):
        """Test rows with the wrong number of fields."""
        text = trace_text([HEADER, COLUMNS, "0,0,1,1,100", "0,0,2,0,,", "0,1,2,1,0,7"])
        assert "field-count" in self.codes(text)

    def test_line_numbers(self):
        """Test that violations carry their line number."""
        _, violations = parse_trace_text(trace_text([HEADER, COLUMNS, "0,0,1,1,x,5", "0,0,2,0,,", "0,1,2,1,0,7"]))
        assert any(v.line == 3 for v in violations)

    def test_file_round_trip(self, tmp_path):
        """Test write_trace then read_trace and validate_trace."""
        trace = generate_trace(small_config())
        path = write_trace(trace, tmp_path / "sim.trace")
        assert validate_trace(path) == []
        assert read_trace(path) == trace

    def test_read_invalid_raises(self, tmp_path):
        """Test that read_trace raises with all violations."""
        path = tmp_path / "bad.trace"
        path.write_text("nonsense\n")
        with pytest.raises(TraceFormatError) as info:
            read_trace(path)
        assert info.value.violations[0].code == "header-malformed"

    def test_missing_file(self, tmp_path):
        """Test that a missing file raises TraceIOError."""
        with pytest.raises(TraceIOError):
            validate_trace(tmp_path / "missing.trace")

    def test_config_binding(self):
        """Test machine and config mismatches."""
        trace = generate_trace(small_config())
        assert check_trace_matches(trace, small_config()) == []
        other = small_config(stations=False)
        codes = {v.code for v in check_trace_matches(trace, other)}
        assert codes == {"machine-mismatch", "config-mismatch"}


class TestReplay:
    """Test cases for trace replay."""

    def expected_table(self, trace):
        table = {}
        for record in trace.epochs[-1]:
            if record.reachable:
                params = LinkParams(record.latency_us, record.bandwidth_kbps, 0)
                table[DestKey(record.source, record.target)] = params
                table[DestKey(record.target, record.source)] = params
        return dict(sorted(table.items()))

    def test_end_state_matches_last_epoch(self):
        """Test 20 random configs on both backends."""
        rng = random.Random(99)
        for _ in range(20):
            trace = generate_trace(random_config(rng))
            for kind in ("hash", "scan"):
                backend = create_backend(kind, machine_count=trace.header.machines)
                replay(trace, backend)
                assert backend.table() == self.expected_table(trace)
                assert mesh_from_backend(backend, trace.header.machines) == trace.mesh(trace.header.epochs - 1)

    def test_report_counts(self):
        """Test that the first epoch creates every reachable link."""
        trace = generate_trace(small_config())
        report = replay(trace, create_backend("hash", machine_count=trace.header.machines))
        reachable = sum(1 for r in trace.epochs[0] if r.reachable)
        assert report.epochs[0].created == reachable
        assert report.epochs[0].removed == 0
        assert len(report.epochs) == trace.header.epochs
        assert report.overruns == []

    def test_on_epoch_callback(self):
        """Test that the callback sees every epoch in order."""
        trace = generate_trace(small_config())
        seen = []
        replay(trace, create_backend("hash"), ClockMode.SIMULATED, on_epoch=lambda e, u: seen.append(e))
        assert seen == [0, 1, 2]

    def test_machine_count_mismatch(self):
        """Test that a backend for a different machine count is rejected."""
        trace = generate_trace(small_config())
        with pytest.raises(FabricError):
            replay(trace, create_backend("hash", machine_count=2))

    def pair_trace(self, states):
        """Two-machine trace; each state is (latency_us, bandwidth_kbps) or None."""
        lines = [f"#orbitmesh-trace v1 config={HASH} machines=2 step_s=1 epochs={len(states)}", COLUMNS]
        for epoch, state in enumerate(states):
            lines.append(f"{epoch},0,1,0,," if state is None else f"{epoch},0,1,1,{state[0]},{state[1]}")
        trace, violations = parse_trace_text(trace_text(lines))
        assert violations == []
        return trace

    def test_identical_epochs_no_updates(self):
        """Test that an unchanged epoch produces zero updates."""
        trace = self.pair_trace([(10, 5), (10, 5)])
        report = replay(trace, create_backend("hash", machine_count=2))
        assert report.epochs[0].updates == 1
        assert report.epochs[1].updates == 0

    def test_flipping_pair_alternates(self):
        """Test a pair flipping reachability every epoch."""
        trace = self.pair_trace([(10, 5), None, (10, 5), None])
        report = replay(trace, create_backend("scan", machine_count=2))
        assert [(e.created, e.removed) for e in report.epochs] == [(1, 0), (0, 1), (1, 0), (0, 1)]

    def test_replay_idempotent(self):
        """Test that replaying a trace twice leaves the same table."""
        trace = generate_trace(small_config())
        backend = create_backend("hash", machine_count=trace.header.machines)
        replay(trace, backend)
        first = backend.table()
        replay(trace, backend)
        assert backend.table() == first == self.expected_table(trace)

    def test_replay_onto_current_state_is_empty(self):
        """Test that replaying the state a backend already holds issues no updates."""
        trace = generate_trace(small_config())
        backend = create_backend("hash", machine_count=trace.header.machines)
        replay(trace, backend)
        header = trace.header
        last = Trace(TraceHeader(header.config_hash, header.machines, header.step_s, 1), (trace.epochs[-1],))
        assert replay(last, backend).total_updates == 0

    def test_preloaded_unlimited_link(self):
        """Test replay over a backend holding unlimited-rate and lossy links."""
        backend = create_backend("hash", machine_count=2)
        backend.set_link(DestKey(0, 1), LinkParams(100))
        backend.set_link(DestKey(1, 0), LinkParams(100, 50, loss_ppm=7))
        report = replay(self.pair_trace([(10, 5)]), backend)
        assert report.epochs[0].modified == 1
        assert backend.table() == {DestKey(0, 1): LinkParams(10, 5), DestKey(1, 0): LinkParams(10, 5)}

    def test_preloaded_links_removed(self):
        """Test that an unreachable first epoch clears leftover links."""
        backend = create_backend("hash", machine_count=2)
        backend.set_link(DestKey(1, 0), LinkParams(100))
        report = replay(self.pair_trace([None]), backend)
        assert report.epochs[0].removed == 1
        assert backend.table() == {}

    def test_sync_updates_noop(self):
        """Test that a backend matching the target needs no updates."""
        trace = self.pair_trace([(10, 5)])
        backend = create_backend("hash", machine_count=2)
        replay(trace, backend)
        assert sync_updates(backend, trace.mesh(0)) == []

    def test_mesh_from_unlimited_backend(self):
        """Test that unlimited links cannot be read back as a mesh."""
        backend = create_backend("hash", machine_count=2)
        backend.set_link(DestKey(0, 1), LinkParams(100))
        with pytest.raises(FabricError):
            mesh_from_backend(backend, 2)


if __name__ == "__main__":
    pytest.main([__file__])
