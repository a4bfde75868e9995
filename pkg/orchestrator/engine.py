"""Discrete-event execution of experiment plans."""

import heapq
import itertools
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, List, Optional, Tuple, Union

import structlog

from fabric_backends.base import FabricBackend
from orchestrator.actions import ActionExecutor, AppHook, fabric_action
from orchestrator.plan import PLAN_STARTED, TRACE_EPOCH, Action, ExperimentPlan, Rule, validate_plan
from topology.mesh import diff
from topology.models import MeshSnapshot
from tracegen.replay import ClockMode, apply_link_updates, sync_updates
from tracegen.trace import Trace
from utils.errors import FabricError, OrbitMeshError, OrchestratorError, PlanValidationError
from utils.text_utils import render_csv, save_text_to_file

logger = structlog.get_logger(__name__)

EVENT_LOG_HEADER = ["logical_time_us", "event", "rule", "action", "outcome"]

_EVENT = "event"
_FIRE = "fire"
_EPOCH = "epoch"


def seconds_to_us(seconds: float) -> int:
    return int(round(seconds * 1_000_000))


@dataclass(frozen=True)
class EventRecord:
    """
    One log line.

    Event records leave ``rule`` empty and carry ``event`` (raised by the
    plan), ``injected`` (with the payload in ``action``) or ``trace`` (with
    the epoch and its update count in ``action``) as outcome. Action records
    carry the triggering event, the rule id and ``ok``/``failed``.
    """

    logical_time_us: int
    event: str
    rule: str = ""
    action: str = ""
    outcome: str = _EVENT

    def as_row(self) -> List[object]:
        return [self.logical_time_us, self.event, self.rule, self.action, self.outcome]


@dataclass(frozen=True)
class Injection:
    time_s: float
    name: str
    payload: Any = None


@dataclass
class EventLog:
    records: List[EventRecord] = field(default_factory=list)
    drift_us: List[int] = field(default_factory=list)
    applied: List[Action] = field(default_factory=list)

    def events(self) -> List[Tuple[int, str]]:
        return [(r.logical_time_us, r.event) for r in self.records if not r.rule]

    def actions(self) -> List[EventRecord]:
        return [r for r in self.records if r.rule]

    def to_csv(self) -> str:
        return render_csv(EVENT_LOG_HEADER, (r.as_row() for r in self.records))

    def write(self, output_path: Union[str, Path]) -> Path:
        return save_text_to_file(self.to_csv(), output_path)

    def replay(self, backend: FabricBackend) -> None:
        """Re-apply every successful fabric action, in order, to ``backend``."""
        executor = ActionExecutor(backend)
        for action in self.applied:
            executor.apply(action)


class Orchestrator:
    """
    Runs one experiment plan against a fabric backend.

    Entries in the queue are ordered by (logical time, insertion sequence),
    so simultaneous entries keep emission order and rules matching one
    event are scheduled in declaration order. An orchestrator runs once.
    """

    def __init__(
        self,
        plan: ExperimentPlan,
        backend: FabricBackend,
        app_hook: Optional[AppHook] = None,
        mode: ClockMode = ClockMode.SIMULATED,
        strict: bool = False,
        trace: Optional[Trace] = None,
    ):
        """
        Initialize the orchestrator.

        Args:
            plan: Experiment plan; must validate
            backend: Fabric the actions mutate
            app_hook: Called with (target, command) for app_command actions
            mode: Simulated (instant) or wallclock (sleeping) time
            strict: Abort the run on the first failed action
            trace: Trace whose epochs are applied to the backend at their logical times
        """
        violations = validate_plan(plan)
        if violations:
            raise PlanValidationError(violations)
        if trace is not None and backend.machine_count is not None:
            if backend.machine_count != trace.header.machines:
                raise FabricError(
                    f"backend serves {backend.machine_count} machines, trace has {trace.header.machines}"
                )
        self.trace = trace
        self.backend = backend
        self.plan = plan
        self.mode = ClockMode(mode)
        self.strict = strict
        self.executor = ActionExecutor(backend, app_hook)
        self.log = EventLog()

        self._queue: List[Tuple[int, int, str, Any]] = []
        self._seq = itertools.count()
        self._now_us = 0
        self._started_ns: Optional[int] = None
        self._pending: List[Tuple[str, Any]] = []
        self._lock = threading.Lock()
        self._wakeup = threading.Event()
        self._state = "idle"
        self._trace_mesh: Optional[MeshSnapshot] = None

    @property
    def running(self) -> bool:
        return self._state == "running"

    def _push(self, time_us: int, kind: str, payload: Any) -> None:
        heapq.heappush(self._queue, (time_us, next(self._seq), kind, payload))

    def _current_time_us(self) -> int:
        if self.mode is ClockMode.WALLCLOCK and self._started_ns is not None:
            return max(self._now_us, (time.monotonic_ns() - self._started_ns) // 1000)
        return self._now_us

    def inject_event(self, name: str, payload: Any = None) -> None:
        """
        Queue an external event at the current logical time.

        Safe to call from other threads and from the application hook.
        """
        if name not in self.plan.external_events:
            raise OrchestratorError(f"event {name!r} is not declared external")
        with self._lock:
            if self._state != "running":
                raise OrchestratorError(f"cannot inject {name!r}: no active run")
            self._pending.append((name, payload))
        self._wakeup.set()

    def _drain_pending(self) -> None:
        with self._lock:
            pending, self._pending = self._pending, []
        now = self._current_time_us()
        for name, payload in pending:
            self._push(now, _EVENT, (name, payload, True))

    def _wait_until(self, time_us: int) -> bool:
        """Sleep until ``time_us`` of wall time; False if woken by an injection."""
        if self.mode is not ClockMode.WALLCLOCK:
            return True
        remaining = self._started_ns + time_us * 1000 - time.monotonic_ns()
        if remaining <= 0:
            return True
        woken = self._wakeup.wait(remaining / 1e9)
        self._wakeup.clear()
        return not woken

    def _record_drift(self, time_us: int) -> None:
        if self.mode is ClockMode.WALLCLOCK:
            elapsed_us = (time.monotonic_ns() - self._started_ns) // 1000
            self.log.drift_us.append(elapsed_us - time_us)

    def _on_event(self, name: str, injected: bool, payload: Any = None) -> None:
        outcome = "injected" if injected else _EVENT
        detail = "" if payload is None else str(payload)
        self.log.records.append(EventRecord(self._now_us, name, action=detail, outcome=outcome))
        self._match(name)

    def _match(self, name: str) -> None:
        logger.debug("event", name=name, logical_time_us=self._now_us)
        for rule in self.plan.rules:
            if rule.trigger.on_event == name:
                self._push(self._now_us + seconds_to_us(rule.trigger.delay_s), _FIRE, (rule, name))

    def _apply_epoch(self, epoch: int) -> None:
        target = self.trace.mesh(epoch)
        if self._trace_mesh is None:
            updates = sync_updates(self.backend, target)
        else:
            updates = diff(self._trace_mesh, target)
        apply_link_updates(self.backend, updates)
        self._trace_mesh = target
        detail = f"epoch={epoch},updates={len(updates)}"
        self.log.records.append(EventRecord(self._now_us, TRACE_EPOCH, action=detail, outcome="trace"))
        self._match(TRACE_EPOCH)

    def _fire(self, rule: Rule, trigger_label: str) -> None:
        for action in rule.actions:
            kind = action.kind.value
            try:
                self.executor.apply(action)
            except OrbitMeshError as e:
                self.log.records.append(
                    EventRecord(self._now_us, trigger_label, rule.rule_id, action.describe(), "failed")
                )
                logger.warning("action_failed", rule=rule.rule_id, action=action.describe(), error=str(e))
                if self.strict:
                    raise OrchestratorError(f"rule {rule.rule_id}: {action.describe()} failed: {e}") from e
                self._push(self._now_us, _EVENT, (f"{kind}_failed", None, False))
            else:
                self.log.records.append(
                    EventRecord(self._now_us, trigger_label, rule.rule_id, action.describe(), "ok")
                )
                if fabric_action(action):
                    self.log.applied.append(action)
                self._push(self._now_us, _EVENT, (f"{kind}_done", None, False))
            if action.name is not None:
                self._push(self._now_us, _EVENT, (action.name, None, False))
            if action.emit:
                self._push(self._now_us, _EVENT, (action.emit, None, False))

    def run(self, injections: Iterable[Injection] = ()) -> EventLog:
        """
        Execute the plan until the queue is empty.

        Args:
            injections: Script of external events entering the queue at fixed times

        Returns:
            The EventLog; also kept on ``self.log``
        """
        script = sorted(injections, key=lambda inj: inj.time_s)
        for inj in script:
            if inj.name not in self.plan.external_events:
                raise OrchestratorError(f"event {inj.name!r} is not declared external")
            if inj.time_s < 0:
                raise OrchestratorError(f"injection {inj.name!r} at negative time {inj.time_s}")
        with self._lock:
            if self._state != "idle":
                raise OrchestratorError("an orchestrator runs only once")
            self._state = "running"

        self._push(0, _EVENT, (PLAN_STARTED, None, False))
        if self.trace is not None:
            for epoch in range(self.trace.header.epochs):
                self._push(seconds_to_us(self.trace.epoch_time_s(epoch)), _EPOCH, epoch)
        for rule in self.plan.rules:
            if rule.trigger.at_time_s is not None:
                self._push(seconds_to_us(rule.trigger.at_time_s), _FIRE, (rule, rule.trigger.label()))
        for inj in script:
            self._push(seconds_to_us(inj.time_s), _EVENT, (inj.name, inj.payload, True))

        self._started_ns = time.monotonic_ns()
        logger.info("plan_started", rules=len(self.plan.rules), mode=self.mode.value)
        try:
            while True:
                self._drain_pending()
                if not self._queue:
                    break
                time_us = self._queue[0][0]
                if not self._wait_until(time_us):
                    continue
                time_us, _, kind, payload = heapq.heappop(self._queue)
                self._now_us = time_us
                self._record_drift(time_us)
                if kind == _EVENT:
                    name, data, injected = payload
                    self._on_event(name, injected, data)
                elif kind == _EPOCH:
                    self._apply_epoch(payload)
                else:
                    rule, label = payload
                    self._fire(rule, label)
        finally:
            with self._lock:
                self._state = "finished"
        logger.info("plan_finished", records=len(self.log.records), logical_time_us=self._now_us)
        return self.log


def run_plan(
    plan: ExperimentPlan,
    backend: FabricBackend,
    mode: ClockMode = ClockMode.SIMULATED,
    app_hook: Optional[AppHook] = None,
    injections: Iterable[Injection] = (),
    strict: bool = False,
    trace: Optional[Trace] = None,
) -> EventLog:
    """Validate and run a plan in one call."""
    orchestrator = Orchestrator(plan, backend, app_hook=app_hook, mode=mode, strict=strict, trace=trace)
    return orchestrator.run(injections)
