"""Replay of traces against a fabric backend."""

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional

import structlog

from fabric_backends.base import DestKey, FabricBackend, LinkParams
from topology.mesh import diff
from topology.models import UNREACHABLE, ChangeKind, LinkUpdate, MeshLink, MeshSnapshot
from tracegen.trace import Trace
from utils.errors import FabricError

logger = structlog.get_logger(__name__)


class ClockMode(Enum):
    SIMULATED = "simulated"
    WALLCLOCK = "wallclock"


@dataclass(frozen=True)
class EpochReport:
    epoch: int
    created: int
    removed: int
    modified: int
    apply_ns: int
    overrun: bool = False

    @property
    def updates(self) -> int:
        return self.created + self.removed + self.modified


@dataclass
class ReplayReport:
    epochs: List[EpochReport] = field(default_factory=list)

    @property
    def total_updates(self) -> int:
        return sum(report.updates for report in self.epochs)

    @property
    def overruns(self) -> List[int]:
        return [report.epoch for report in self.epochs if report.overrun]


def mesh_from_backend(backend: FabricBackend, machine_count: int) -> MeshSnapshot:
    """
    Read back the mesh a backend currently emulates.

    A pair counts as reachable when its (a, b) entry is present. Links
    without a rate limit have no mesh equivalent and raise FabricError.
    """
    table = backend.table()
    links = {}
    for a in range(machine_count):
        for b in range(a + 1, machine_count):
            params = table.get(DestKey(a, b))
            if params is None:
                links[(a, b)] = UNREACHABLE
            elif params.rate_kbps is None:
                raise FabricError(f"link {a}-{b} has no rate limit and no mesh equivalent")
            else:
                links[(a, b)] = MeshLink(True, params.delay_us, params.rate_kbps)
    return MeshSnapshot(tuple(range(machine_count)), links)


def sync_updates(backend: FabricBackend, target: MeshSnapshot) -> List[LinkUpdate]:
    """
    Updates that bring whatever a backend holds in line with ``target``.

    Both directions of every pair are compared with the parameters the
    target implies, so one-sided, lossy or unlimited links left by earlier
    users of the backend are overwritten or removed.
    """
    table = backend.table()
    updates = []
    for pair in target.pairs():
        a, b = pair
        link = target.links[pair]
        present = [table.get(DestKey(a, b)), table.get(DestKey(b, a))]
        if not link.reachable:
            if any(params is not None for params in present):
                updates.append(LinkUpdate(pair, ChangeKind.REMOVED))
            continue
        wanted = LinkParams.from_mesh_link(link)
        if all(params == wanted for params in present):
            continue
        kind = ChangeKind.CREATED if all(params is None for params in present) else ChangeKind.MODIFIED
        updates.append(LinkUpdate(pair, kind, link))
    return updates


def apply_link_updates(backend: FabricBackend, updates: List[LinkUpdate]) -> None:
    """Issue set_link/remove_link for both directions of every updated pair."""
    for update in updates:
        a, b = update.pair
        if update.kind is ChangeKind.REMOVED:
            backend.remove_link(DestKey(a, b))
            backend.remove_link(DestKey(b, a))
        else:
            params = LinkParams.from_mesh_link(update.link)
            backend.set_link(DestKey(a, b), params)
            backend.set_link(DestKey(b, a), params)


def replay(
    trace: Trace,
    backend: FabricBackend,
    clock: ClockMode = ClockMode.SIMULATED,
    on_epoch: Optional[Callable[[int, List[LinkUpdate]], None]] = None,
) -> ReplayReport:
    """
    Drive a backend through every epoch of a trace.

    The first epoch is synced against whatever the backend holds; after that
    each epoch boundary applies the diff against the previous epoch. In
    wallclock mode the replay sleeps until each boundary and an epoch whose
    application takes longer than the step is reported as an overrun (the
    replay carries on).

    Args:
        trace: Validated trace
        backend: Backend whose machine count must match the trace
        clock: Simulated (no sleeping) or wallclock pacing
        on_epoch: Called with (epoch, updates) after each epoch is applied

    Returns:
        ReplayReport with per-epoch update counts and apply durations
    """
    machines = trace.header.machines
    if backend.machine_count is not None and backend.machine_count != machines:
        raise FabricError(
            f"backend serves {backend.machine_count} machines, trace has {machines}"
        )
    clock = ClockMode(clock)
    step_ns = int(trace.header.step_s * 1e9)

    report = ReplayReport()
    applied: Optional[MeshSnapshot] = None
    started = time.monotonic_ns()
    for epoch in range(trace.header.epochs):
        if clock is ClockMode.WALLCLOCK:
            wait_ns = started + epoch * step_ns - time.monotonic_ns()
            if wait_ns > 0:
                time.sleep(wait_ns / 1e9)

        target = trace.mesh(epoch)
        updates = sync_updates(backend, target) if applied is None else diff(applied, target)
        begin = time.perf_counter_ns()
        apply_link_updates(backend, updates)
        apply_ns = time.perf_counter_ns() - begin
        applied = target

        counts = {kind: 0 for kind in ChangeKind}
        for update in updates:
            counts[update.kind] += 1
        overrun = clock is ClockMode.WALLCLOCK and apply_ns > step_ns
        if overrun:
            logger.warning("epoch_overrun", epoch=epoch, apply_ns=apply_ns, step_ns=step_ns)
        report.epochs.append(
            EpochReport(
                epoch=epoch,
                created=counts[ChangeKind.CREATED],
                removed=counts[ChangeKind.REMOVED],
                modified=counts[ChangeKind.MODIFIED],
                apply_ns=apply_ns,
                overrun=overrun,
            )
        )
        logger.debug("epoch_applied", epoch=epoch, updates=len(updates), apply_ns=apply_ns)
        if on_epoch is not None:
            on_epoch(epoch, updates)

    logger.info("replay_finished", epochs=len(report.epochs), updates=report.total_updates)
    return report
