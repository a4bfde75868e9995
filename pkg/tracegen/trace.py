"""Trace generation, serialization and validation."""

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import structlog
from tqdm import tqdm

from constellation.snapshot import snapshot
from topology.mesh import reduce_full_mesh
from topology.models import UNREACHABLE, MeshLink, MeshSnapshot
from utils.config_utils import MainConfig
from utils.errors import TraceFormatError, TraceIOError, Violation
from utils.text_utils import format_number, read_text_file, save_text_to_file

logger = structlog.get_logger(__name__)

TRACE_MAGIC = "#orbitmesh-trace"
TRACE_VERSION = "v1"
COLUMNS = ("epoch", "source", "target", "reachable", "latency_us", "bandwidth_kbps")
COLUMN_HEADER = ",".join(COLUMNS)
_HEADER_RE = re.compile(
    r"^#orbitmesh-trace v1 config=([0-9a-f]{64}) machines=(\d+) "
    r"step_s=([0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?) epochs=(\d+)$"
)
_UINT_RE = re.compile(r"^(0|[1-9][0-9]*)$")


@dataclass(frozen=True)
class LinkRecord:
    """State of one machine pair (source < target) in one epoch."""

    epoch: int
    source: int
    target: int
    reachable: bool
    latency_us: Optional[int] = None
    bandwidth_kbps: Optional[int] = None

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        return (self.epoch, self.source, self.target)

    def mesh_link(self) -> MeshLink:
        if not self.reachable:
            return UNREACHABLE
        return MeshLink(True, self.latency_us, self.bandwidth_kbps)

    def to_line(self) -> str:
        if self.reachable:
            return (
                f"{self.epoch},{self.source},{self.target},1,"
                f"{self.latency_us},{self.bandwidth_kbps}"
            )
        return f"{self.epoch},{self.source},{self.target},0,,"


@dataclass(frozen=True)
class TraceHeader:
    config_hash: str
    machines: int
    step_s: float
    epochs: int

    def to_line(self) -> str:
        return (
            f"{TRACE_MAGIC} {TRACE_VERSION} config={self.config_hash} "
            f"machines={self.machines} step_s={format_number(self.step_s)} epochs={self.epochs}"
        )


@dataclass(frozen=True)
class Trace:
    """
    Epoch-indexed full mesh states.

    ``epochs[k]`` holds the records of time k * step_s, sorted by
    (source, target), one per machine pair.
    """

    header: TraceHeader
    epochs: Tuple[Tuple[LinkRecord, ...], ...]

    @property
    def machine_ids(self) -> Tuple[int, ...]:
        return tuple(range(self.header.machines))

    def epoch_time_s(self, epoch: int) -> float:
        return epoch * self.header.step_s

    def mesh(self, epoch: int) -> MeshSnapshot:
        """The mesh of one epoch, over machine ids 0..m-1."""
        links = {(r.source, r.target): r.mesh_link() for r in self.epochs[epoch]}
        return MeshSnapshot(self.machine_ids, links)


def mesh_records(epoch: int, mesh: MeshSnapshot) -> Tuple[LinkRecord, ...]:
    records = []
    for a, b in mesh.pairs():
        link = mesh.links[(a, b)]
        records.append(LinkRecord(epoch, a, b, link.reachable, link.latency_us, link.bandwidth_kbps))
    return tuple(records)


def epoch_count(duration_s: float, step_s: float) -> int:
    """Epochs at t = 0, step, 2*step, ... strictly before ``duration_s``."""
    if not (step_s > 0 and math.isfinite(step_s)):
        raise ValueError(f"step_s must be > 0, got {step_s}")
    if not duration_s >= step_s:
        raise ValueError(f"duration_s ({duration_s}) must be >= step_s ({step_s})")
    return max(1, int(math.ceil(duration_s / step_s - 1e-9)))


def generate_trace(
    config: MainConfig,
    duration_s: Optional[float] = None,
    step_s: Optional[float] = None,
    progress: bool = False,
) -> Trace:
    """
    Generate a trace from a configuration.

    Every epoch carries the full mesh state; diffs are left to replay.

    Args:
        config: Main configuration (constellation and machine selection)
        duration_s: Trace length, defaults to ``config.duration_s``
        step_s: Epoch spacing, defaults to ``config.step_s``
        progress: Show a tqdm progress bar

    Returns:
        Trace, a pure function of (config, duration_s, step_s)
    """
    step = config.step_s if step_s is None else float(step_s)
    duration = config.duration_s if duration_s is None else float(duration_s)
    if duration is None:
        raise ValueError("duration_s is neither given nor configured")
    count = epoch_count(duration, step)

    epochs = []
    for epoch in tqdm(range(count), desc="Generating epochs", disable=not progress):
        logical = snapshot(config.constellation, epoch * step)
        mesh = reduce_full_mesh(logical, config.machines)
        epochs.append(mesh_records(epoch, mesh))

    header = TraceHeader(config.config_hash(), len(config.machines), step, count)
    logger.info("trace_generated", epochs=count, machines=header.machines, step_s=step)
    return Trace(header, tuple(epochs))


def render_trace(trace: Trace) -> str:
    lines = [trace.header.to_line(), COLUMN_HEADER]
    for records in trace.epochs:
        lines.extend(record.to_line() for record in records)
    return "\n".join(lines) + "\n"


def write_trace(trace: Trace, output_path: Union[str, Path]) -> Path:
    return save_text_to_file(render_trace(trace), output_path, error_cls=TraceIOError)


def _parse_uint(value: str) -> Optional[int]:
    return int(value) if _UINT_RE.match(value) else None


def parse_trace_text(text: str) -> Tuple[Optional[Trace], List[Violation]]:
    """
    Parse and validate trace text.

    Returns:
        (trace, violations); trace is None whenever violations is non-empty
    """
    violations: List[Violation] = []
    if "\r" in text:
        violations.append(Violation("line-ending", "CR characters found; traces use LF only"))
    if text and not text.endswith("\n"):
        violations.append(Violation("line-ending", "file does not end with LF"))
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        return None, [Violation("header-missing", "empty file", 1)]

    match = _HEADER_RE.match(lines[0].rstrip("\r"))
    if not match:
        return None, violations + [Violation("header-malformed", f"bad header {lines[0]!r}", 1)]
    header = TraceHeader(match.group(1), int(match.group(2)), float(match.group(3)), int(match.group(4)))
    if header.step_s <= 0:
        violations.append(Violation("header-malformed", "step_s must be > 0", 1))
    if header.machines < 1:
        violations.append(Violation("header-malformed", "machines must be >= 1", 1))
    if header.epochs < 1:
        violations.append(Violation("header-malformed", "epochs must be >= 1", 1))
    if len(lines) < 2 or lines[1].rstrip("\r") != COLUMN_HEADER:
        violations.append(Violation("columns-malformed", f"expected {COLUMN_HEADER!r}", 2))

    per_epoch: Dict[int, List[LinkRecord]] = {}
    previous_key = None
    for line_no, raw in enumerate(lines[2:], start=3):
        line = raw.rstrip("\r")
        if line != line.rstrip(" \t"):
            violations.append(Violation("trailing-space", "trailing whitespace", line_no))
            line = line.rstrip(" \t")
        fields = line.split(",")
        if len(fields) != len(COLUMNS):
            violations.append(Violation("field-count", f"expected 6 fields, got {len(fields)}", line_no))
            continue
        epoch, source, target, reachable = (_parse_uint(f) for f in fields[:4])
        if None in (epoch, source, target, reachable) or reachable not in (0, 1):
            violations.append(Violation("field-invalid", f"bad key fields in {line!r}", line_no))
            continue
        latency_raw, bandwidth_raw = fields[4], fields[5]
        if reachable == 0:
            if latency_raw or bandwidth_raw:
                violations.append(
                    Violation("unreachable-with-values", "reachable=0 but latency/bandwidth present", line_no)
                )
                continue
            latency = bandwidth = None
        else:
            latency, bandwidth = _parse_uint(latency_raw), _parse_uint(bandwidth_raw)
            if latency is None or bandwidth is None or bandwidth == 0:
                violations.append(
                    Violation("reachable-missing-values", "reachable=1 needs latency >= 0 and bandwidth > 0", line_no)
                )
                continue
        if source >= target:
            violations.append(Violation("pair-order", f"source {source} must be < target {target}", line_no))
            continue
        if target >= header.machines:
            violations.append(Violation("machine-range", f"machine {target} >= {header.machines}", line_no))
            continue
        if epoch >= header.epochs:
            violations.append(Violation("epoch-range", f"epoch {epoch} >= {header.epochs}", line_no))
            continue
        key = (epoch, source, target)
        if previous_key is not None and key <= previous_key:
            violations.append(Violation("record-order", f"record {key} not after {previous_key}", line_no))
            continue
        previous_key = key
        per_epoch.setdefault(epoch, []).append(
            LinkRecord(epoch, source, target, bool(reachable), latency, bandwidth)
        )

    pairs = header.machines * (header.machines - 1) // 2
    for epoch in range(header.epochs):
        found = len(per_epoch.get(epoch, ()))
        if found != pairs:
            violations.append(
                Violation("epoch-incomplete", f"epoch {epoch} has {found} records, expected {pairs}")
            )

    if violations:
        return None, violations
    epochs = tuple(tuple(per_epoch.get(e, ())) for e in range(header.epochs))
    return Trace(header, epochs), []


def validate_trace(trace_path: Union[str, Path]) -> List[Violation]:
    """
    Validate a trace file.

    Args:
        trace_path: File to check

    Returns:
        Violations; an empty list means the trace is valid. Unreadable files
        raise TraceIOError instead.
    """
    _, violations = parse_trace_text(read_text_file(trace_path, error_cls=TraceIOError))
    return violations


def read_trace(trace_path: Union[str, Path]) -> Trace:
    """Read and validate a trace file, raising TraceFormatError on violations."""
    trace, violations = parse_trace_text(read_text_file(trace_path, error_cls=TraceIOError))
    if violations:
        raise TraceFormatError(violations)
    return trace


def check_trace_matches(trace: Trace, config: MainConfig) -> List[Violation]:
    """Violations binding a trace to a configuration (machine count, config hash)."""
    violations = []
    if trace.header.machines != len(config.machines):
        violations.append(
            Violation(
                "machine-mismatch",
                f"trace has {trace.header.machines} machines, config selects {len(config.machines)}",
            )
        )
    if trace.header.config_hash != config.config_hash():
        violations.append(Violation("config-mismatch", "trace was generated from a different config"))
    return violations

