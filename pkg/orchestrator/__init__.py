"""Experiment orchestration: event-chained rules driving the fabric."""

from .plan import (
    PLAN_STARTED,
    TRACE_EPOCH,
    Action,
    ActionKind,
    ExperimentPlan,
    Rule,
    Trigger,
    load_plan,
    parse_plan,
    validate_plan,
)
from .actions import ActionExecutor
from .engine import EVENT_LOG_HEADER, EventLog, EventRecord, Injection, Orchestrator, run_plan

__all__ = [
    'PLAN_STARTED', 'TRACE_EPOCH', 'Action', 'ActionKind', 'ExperimentPlan', 'Rule', 'Trigger',
    'load_plan', 'parse_plan', 'validate_plan', 'ActionExecutor', 'EVENT_LOG_HEADER',
    'EventLog', 'EventRecord', 'Injection', 'Orchestrator', 'run_plan',
]
