"""Experiment plans: trigger -> action rules, parsing and validation."""

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Set, Tuple, Union

from fabric_backends.base import LinkParams
from utils.config_utils import load_toml
from utils.errors import ConfigError, FabricError, PlanParseError, Violation

PLAN_STARTED = "plan_started"
TRACE_EPOCH = "trace_epoch"


class ActionKind(Enum):
    SET_LINK = "set_link"
    DROP_LINK = "drop_link"
    RESTORE_LINK = "restore_link"
    NODE_OFF = "node_off"
    NODE_ON = "node_on"
    APP_COMMAND = "app_command"
    EMIT = "emit"
    SCALE_LINKS = "scale_links"


@dataclass(frozen=True)
class Action:
    """
    One step of a rule.

    Only the fields relevant to ``kind`` are set. ``emit`` names an extra
    event raised after the action completes successfully or not.
    """

    kind: ActionKind
    pair: Optional[Tuple[int, int]] = None
    params: Optional[LinkParams] = None
    node: Optional[int] = None
    target: Optional[str] = None
    command: Optional[str] = None
    name: Optional[str] = None
    factor: Optional[float] = None
    emit: Optional[str] = None

    @classmethod
    def set_link(cls, a: int, b: int, params: LinkParams, emit: Optional[str] = None) -> "Action":
        return cls(ActionKind.SET_LINK, pair=(a, b), params=params, emit=emit)

    @classmethod
    def drop_link(cls, a: int, b: int, emit: Optional[str] = None) -> "Action":
        return cls(ActionKind.DROP_LINK, pair=(a, b), emit=emit)

    @classmethod
    def restore_link(cls, a: int, b: int, emit: Optional[str] = None) -> "Action":
        return cls(ActionKind.RESTORE_LINK, pair=(a, b), emit=emit)

    @classmethod
    def node_off(cls, node: int, emit: Optional[str] = None) -> "Action":
        return cls(ActionKind.NODE_OFF, node=node, emit=emit)

    @classmethod
    def node_on(cls, node: int, emit: Optional[str] = None) -> "Action":
        return cls(ActionKind.NODE_ON, node=node, emit=emit)

    @classmethod
    def app_command(cls, target: str, command: str, emit: Optional[str] = None) -> "Action":
        return cls(ActionKind.APP_COMMAND, target=target, command=command, emit=emit)

    @classmethod
    def emit_event(cls, name: str) -> "Action":
        return cls(ActionKind.EMIT, name=name)

    @classmethod
    def scale_links(cls, factor: float, emit: Optional[str] = None) -> "Action":
        return cls(ActionKind.SCALE_LINKS, factor=factor, emit=emit)

    def describe(self) -> str:
        kind = self.kind.value
        if self.kind is ActionKind.SET_LINK:
            p = self.params
            rate = "unlimited" if p.rate_kbps is None else p.rate_kbps
            return (
                f"{kind}({self.pair[0]},{self.pair[1]},delay_us={p.delay_us},"
                f"rate_kbps={rate},loss_ppm={p.loss_ppm})"
            )
        if self.kind in (ActionKind.DROP_LINK, ActionKind.RESTORE_LINK):
            return f"{kind}({self.pair[0]},{self.pair[1]})"
        if self.kind in (ActionKind.NODE_OFF, ActionKind.NODE_ON):
            return f"{kind}({self.node})"
        if self.kind is ActionKind.APP_COMMAND:
            return f"{kind}({self.target},{self.command})"
        if self.kind is ActionKind.EMIT:
            return f"{kind}({self.name})"
        return f"{kind}({self.factor:g})"

    def emitted_events(self) -> List[str]:
        """Every event this action may raise."""
        events = [f"{self.kind.value}_done", f"{self.kind.value}_failed"]
        if self.kind is ActionKind.EMIT:
            events.append(self.name)
        if self.emit:
            events.append(self.emit)
        return events


@dataclass(frozen=True)
class Trigger:
    """Either a point in time or an event plus a delay."""

    at_time_s: Optional[float] = None
    on_event: Optional[str] = None
    delay_s: float = 0.0

    def label(self) -> str:
        return self.on_event if self.on_event is not None else "at_time"


@dataclass(frozen=True)
class Rule:
    rule_id: str
    trigger: Trigger
    actions: Tuple[Action, ...]


@dataclass
class ExperimentPlan:
    """
    Declarative rule set, also buildable imperatively.

    Example:
        plan = ExperimentPlan()
        plan.at(0, Action.emit_event("preload_done"))
        plan.on("preload_done", Action.app_command("loadgen", "start"))
    """

    rules: List[Rule] = field(default_factory=list)
    external_events: Set[str] = field(default_factory=set)

    def _next_id(self) -> str:
        return f"rule-{len(self.rules) + 1}"

    def at(self, time_s: float, *actions: Action, rule_id: Optional[str] = None) -> Rule:
        rule = Rule(rule_id or self._next_id(), Trigger(at_time_s=float(time_s)), tuple(actions))
        self.rules.append(rule)
        return rule

    def on(
        self, event: str, *actions: Action, delay_s: float = 0.0, rule_id: Optional[str] = None
    ) -> Rule:
        rule = Rule(
            rule_id or self._next_id(),
            Trigger(on_event=event, delay_s=float(delay_s)),
            tuple(actions),
        )
        self.rules.append(rule)
        return rule

    def external(self, *names: str) -> "ExperimentPlan":
        self.external_events.update(names)
        return self


def _find_zero_delay_cycle(plan: ExperimentPlan) -> Optional[List[str]]:
    graph: Dict[str, List[str]] = {}
    for rule in plan.rules:
        trigger = rule.trigger
        if trigger.on_event is None or trigger.delay_s != 0:
            continue
        targets = graph.setdefault(trigger.on_event, [])
        for action in rule.actions:
            targets.extend(action.emitted_events())

    white, grey, black = 0, 1, 2
    color: Dict[str, int] = {}
    stack: List[str] = []

    def visit(event: str) -> Optional[List[str]]:
        color[event] = grey
        stack.append(event)
        for nxt in graph.get(event, ()):
            state = color.get(nxt, white)
            if state == grey:
                return stack[stack.index(nxt):] + [nxt]
            if state == white:
                found = visit(nxt)
                if found:
                    return found
        stack.pop()
        color[event] = black
        return None

    for event in sorted(graph):
        if color.get(event, white) == white:
            cycle = visit(event)
            if cycle:
                return cycle
    return None


def validate_plan(plan: ExperimentPlan) -> List[Violation]:
    """
    Semantic checks of a parsed plan.

    Rejects triggers on events nothing can raise, zero-delay event cycles
    (they would schedule without bound at one instant), empty action lists,
    duplicate rule ids and negative times.

    Args:
        plan: Parsed or built plan

    Returns:
        Violations; empty means the plan is valid
    """
    violations: List[Violation] = []
    emitted = {PLAN_STARTED, TRACE_EPOCH} | set(plan.external_events)
    for rule in plan.rules:
        for action in rule.actions:
            emitted.update(action.emitted_events())

    seen_ids = set()
    for rule in plan.rules:
        if rule.rule_id in seen_ids:
            violations.append(Violation("duplicate-rule-id", f"rule id {rule.rule_id!r} used twice"))
        seen_ids.add(rule.rule_id)
        if not rule.actions:
            violations.append(Violation("empty-actions", f"rule {rule.rule_id!r} has no actions"))
        trigger = rule.trigger
        if trigger.at_time_s is not None and not (trigger.at_time_s >= 0 and math.isfinite(trigger.at_time_s)):
            violations.append(Violation("invalid-time", f"rule {rule.rule_id!r} has a negative time"))
        if trigger.delay_s < 0 or not math.isfinite(trigger.delay_s):
            violations.append(Violation("invalid-time", f"rule {rule.rule_id!r} has a negative delay"))
        if trigger.on_event is not None and trigger.on_event not in emitted:
            violations.append(
                Violation(
                    "unreachable-trigger",
                    f"rule {rule.rule_id!r} waits for {trigger.on_event!r}, which is never "
                    "emitted and not declared external",
                )
            )

    cycle = _find_zero_delay_cycle(plan)
    if cycle:
        violations.append(Violation("zero-delay-cycle", " -> ".join(cycle)))
    return violations


# parsing

_ACTION_KEYS = {
    ActionKind.SET_LINK: {"pair", "delay_us", "rate_kbps", "loss_ppm"},
    ActionKind.DROP_LINK: {"pair"},
    ActionKind.RESTORE_LINK: {"pair"},
    ActionKind.NODE_OFF: {"node"},
    ActionKind.NODE_ON: {"node"},
    ActionKind.APP_COMMAND: {"target", "command"},
    ActionKind.EMIT: {"name"},
    ActionKind.SCALE_LINKS: {"factor"},
}


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _parse_action(table: Any, path: str, errors: List[Violation]) -> Optional[Action]:
    if not isinstance(table, Mapping):
        errors.append(Violation("action-malformed", f"{path}: expected a table"))
        return None
    try:
        kind = ActionKind(table.get("type"))
    except ValueError:
        errors.append(Violation("action-type", f"{path}.type: unknown action {table.get('type')!r}"))
        return None
    allowed = _ACTION_KEYS[kind] | {"type", "emit"}
    unknown = sorted(set(table) - allowed)
    if unknown:
        errors.append(Violation("unknown-key", f"{path}: unknown key '{unknown[0]}'"))
        return None
    missing = sorted(k for k in _ACTION_KEYS[kind] - {"rate_kbps", "loss_ppm"} if k not in table)
    if missing:
        errors.append(Violation("missing-key", f"{path}: missing key '{missing[0]}'"))
        return None
    emit = table.get("emit")
    if emit is not None and not isinstance(emit, str):
        errors.append(Violation("action-malformed", f"{path}.emit must be a string"))
        return None

    pair = None
    if "pair" in table:
        raw = table["pair"]
        if not (isinstance(raw, list) and len(raw) == 2 and all(_is_int(x) and x >= 0 for x in raw) and raw[0] != raw[1]):
            errors.append(Violation("action-malformed", f"{path}.pair must be two distinct machine ids"))
            return None
        pair = (raw[0], raw[1])
    try:
        if kind is ActionKind.SET_LINK:
            params = LinkParams(
                delay_us=table["delay_us"],
                rate_kbps=table.get("rate_kbps"),
                loss_ppm=table.get("loss_ppm", 0),
            )
            return Action(kind, pair=pair, params=params, emit=emit)
    except (FabricError, TypeError) as e:
        errors.append(Violation("action-malformed", f"{path}: {e}"))
        return None
    if kind in (ActionKind.DROP_LINK, ActionKind.RESTORE_LINK):
        return Action(kind, pair=pair, emit=emit)
    if kind in (ActionKind.NODE_OFF, ActionKind.NODE_ON):
        if not (_is_int(table["node"]) and table["node"] >= 0):
            errors.append(Violation("action-malformed", f"{path}.node must be a machine id"))
            return None
        return Action(kind, node=table["node"], emit=emit)
    if kind is ActionKind.APP_COMMAND:
        if not (isinstance(table["target"], str) and isinstance(table["command"], str)):
            errors.append(Violation("action-malformed", f"{path}: target and command must be strings"))
            return None
        return Action(kind, target=table["target"], command=table["command"], emit=emit)
    if kind is ActionKind.EMIT:
        if not isinstance(table["name"], str) or not table["name"]:
            errors.append(Violation("action-malformed", f"{path}.name must be a non-empty string"))
            return None
        return Action(kind, name=table["name"], emit=emit)
    factor = table["factor"]
    if isinstance(factor, bool) or not isinstance(factor, (int, float)) or factor <= 0:
        errors.append(Violation("action-malformed", f"{path}.factor must be > 0"))
        return None
    return Action(kind, factor=float(factor), emit=emit)


def _parse_rule(table: Any, index: int, errors: List[Violation]) -> Optional[Rule]:
    path = f"rules[{index}]"
    if not isinstance(table, Mapping):
        errors.append(Violation("rule-malformed", f"{path}: expected a table"))
        return None
    unknown = sorted(set(table) - {"id", "at_time_s", "on_event", "delay_s", "actions"})
    if unknown:
        errors.append(Violation("unknown-key", f"{path}: unknown key '{unknown[0]}'"))
        return None
    has_time, has_event = "at_time_s" in table, "on_event" in table
    if has_time == has_event:
        errors.append(Violation("rule-trigger", f"{path}: needs exactly one of at_time_s or on_event"))
        return None
    if has_time and "delay_s" in table:
        errors.append(Violation("rule-trigger", f"{path}: delay_s only applies to on_event rules"))
        return None
    number = (int, float)
    if has_time and (isinstance(table["at_time_s"], bool) or not isinstance(table["at_time_s"], number)):
        errors.append(Violation("rule-trigger", f"{path}.at_time_s must be a number"))
        return None
    if has_event and not isinstance(table["on_event"], str):
        errors.append(Violation("rule-trigger", f"{path}.on_event must be a string"))
        return None
    delay = table.get("delay_s", 0.0)
    if isinstance(delay, bool) or not isinstance(delay, number):
        errors.append(Violation("rule-trigger", f"{path}.delay_s must be a number"))
        return None
    raw_actions = table.get("actions", [])
    if not isinstance(raw_actions, list):
        errors.append(Violation("rule-malformed", f"{path}.actions must be an array of tables"))
        return None

    actions = []
    for j, raw in enumerate(raw_actions):
        action = _parse_action(raw, f"{path}.actions[{j}]", errors)
        if action is not None:
            actions.append(action)
    if len(actions) != len(raw_actions):
        return None
    trigger = (
        Trigger(at_time_s=float(table["at_time_s"]))
        if has_time
        else Trigger(on_event=table["on_event"], delay_s=float(delay))
    )
    return Rule(str(table.get("id", f"rule-{index + 1}")), trigger, tuple(actions))


def parse_plan(document: Mapping[str, Any]) -> ExperimentPlan:
    """
    Build a plan from a parsed document, raising PlanParseError on structural errors.

    Semantic problems are left to ``validate_plan``.
    """
    errors: List[Violation] = []
    unknown = sorted(set(document) - {"external_events", "rules"})
    if unknown:
        errors.append(Violation("unknown-key", f"unknown key '{unknown[0]}'"))
    external = document.get("external_events", [])
    if not (isinstance(external, list) and all(isinstance(e, str) for e in external)):
        errors.append(Violation("plan-malformed", "external_events must be an array of strings"))
        external = []
    raw_rules = document.get("rules", [])
    if not isinstance(raw_rules, list):
        errors.append(Violation("plan-malformed", "rules must be an array of tables"))
        raw_rules = []

    rules = [_parse_rule(raw, i, errors) for i, raw in enumerate(raw_rules)]
    if errors:
        raise PlanParseError(errors)
    return ExperimentPlan(rules=list(rules), external_events=set(external))


def load_plan(plan_path: Union[str, Path]) -> ExperimentPlan:
    """
    Load a plan file (TOML, same family as the main config).

    Args:
        plan_path: Path to the plan

    Returns:
        ExperimentPlan (not yet semantically validated)
    """
    try:
        document = load_toml(plan_path)
    except ConfigError as e:
        raise PlanParseError([Violation("plan-syntax", str(e))]) from e
    return parse_plan(document)

