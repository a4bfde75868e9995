#!/usr/bin/env python3
"""
OrbitMesh - LEO edge testbed core

A command-line tool that generates satellite network topology traces,
replays them through emulation fabric backends, benchmarks link setup,
runs event-driven experiment plans and renders static constellation maps.

Exit codes: 0 ok, 1 config or validation error, 2 I/O error, 3 internal error.
"""

import functools
import ipaddress
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import click
import structlog
from dotenv import load_dotenv
from tqdm import tqdm

from fabric_backends.base import FabricBackend
from fabric_backends.bench import BENCH_CSV_HEADER, SetupStats, bench_setup
from fabric_backends.factory import BACKEND_KINDS, create_backend
from fabric_backends.plan import emit_plan
from orchestrator.engine import EventLog, Injection, Orchestrator
from orchestrator.plan import load_plan, validate_plan
from tracegen.replay import ClockMode, ReplayReport, replay
from tracegen.trace import (
    Trace,
    check_trace_matches,
    generate_trace,
    parse_trace_text,
    read_trace,
    render_trace,
    validate_trace,
)
from utils.config_utils import DEFAULT_NETWORK, MainConfig, load_config
from utils.errors import (
    ConfigError,
    FileIOError,
    OrbitMeshError,
    PlanValidationError,
    TraceFormatError,
    Violation,
    _ViolationsError,
)
from utils.log_utils import configure_logging
from utils.svg_utils import render_svg
from utils.text_utils import render_csv, save_text_to_file

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_INTERNAL = 3


def _default_addressing(machines: int):
    network = ipaddress.IPv4Network(DEFAULT_NETWORK)
    return {i: network.network_address + i + 1 for i in range(machines)}


class OrbitMesh:
    """Main class tying configuration, traces, fabric and orchestration together."""

    def __init__(self, config_path: Optional[str] = None, seed: Optional[int] = None, verbose: bool = False):
        """
        Initialize the pipeline.

        Args:
            config_path: Main TOML configuration, loaded lazily
            seed: Fabric seed overriding the configured one
            verbose: Show progress bars and INFO logs
        """
        self.config_path = config_path
        self.seed_override = seed
        self.verbose = verbose
        self._config: Optional[MainConfig] = None

    @property
    def has_config(self) -> bool:
        return self.config_path is not None

    @property
    def config(self) -> MainConfig:
        if self._config is None:
            if self.config_path is None:
                raise ConfigError("no configuration given (use --config or ORBITMESH_CONFIG)")
            self._config = load_config(self.config_path)
        return self._config

    @property
    def seed(self) -> int:
        if self.seed_override is not None:
            return self.seed_override
        return self.config.seed if self.has_config else 0

    def trace(
        self, output_path: str, duration_s: Optional[float] = None, step_s: Optional[float] = None
    ) -> Trace:
        """Generate a trace from the configuration and write it to ``output_path``."""
        trace = generate_trace(self.config, duration_s=duration_s, step_s=step_s, progress=self.verbose)
        text = render_trace(trace)
        _, violations = parse_trace_text(text)
        if violations:
            raise TraceFormatError(violations)
        save_text_to_file(text, output_path)
        return trace

    def replay(
        self,
        trace_path: str,
        backend_kind: str = "hash",
        plan_dir: Optional[str] = None,
        plan_hosts: Sequence[int] = (),
    ) -> ReplayReport:
        """
        Replay a trace through a fresh backend, optionally writing per-host plans.

        Plan files are named ``epoch-<k>-host-<h>.plan`` (zero padded).
        """
        trace = read_trace(trace_path)
        machines = trace.header.machines
        if self.has_config:
            violations = check_trace_matches(trace, self.config)
            if violations:
                raise TraceFormatError(violations)
            addressing, device = self.config.addressing(), self.config.device
        else:
            addressing, device = _default_addressing(machines), "eth0"
        hosts = sorted(set(plan_hosts)) if plan_hosts else list(range(machines))
        for host in hosts:
            if not 0 <= host < machines:
                raise ConfigError(f"--plan-host {host} outside machine range [0, {machines})")

        backend = create_backend(backend_kind, seed=self.seed, machine_count=machines)

        def write_plans(epoch: int, updates) -> None:
            for host in hosts:
                path = Path(plan_dir) / f"epoch-{epoch:05d}-host-{host:03d}.plan"
                save_text_to_file(emit_plan(updates, device, addressing, host), path)

        return replay(trace, backend, ClockMode.SIMULATED, on_epoch=write_plans if plan_dir else None)

    def bench(self, backends: Iterable[str], sizes: Sequence[int], repetitions: int) -> List[SetupStats]:
        """Run bench_setup for every (backend, size) combination."""
        jobs = [(kind, n) for kind in backends for n in sizes]
        results = []
        for kind, n in tqdm(jobs, desc="Benchmarking", disable=not self.verbose):
            results.append(bench_setup(kind, n, repetitions=repetitions, seed=self.seed))
        return results

    def orchestrate(
        self,
        plan_path: str,
        trace_path: Optional[str] = None,
        mode: str = "simulated",
        backend_kind: str = "hash",
        injections: Sequence[Injection] = (),
        strict: bool = False,
    ) -> EventLog:
        """
        Run an experiment plan against a backend.

        With a trace, every trace epoch is applied to the backend at its
        time on the plan's logical timeline.
        """
        plan = load_plan(plan_path)
        violations = validate_plan(plan)
        if violations:
            raise PlanValidationError(violations)

        trace: Optional[Trace] = None
        backend: FabricBackend
        if trace_path is not None:
            trace = read_trace(trace_path)
            machines = trace.header.machines
            backend = create_backend(backend_kind, seed=self.seed, machine_count=machines)
        else:
            backend = create_backend(backend_kind, seed=self.seed)

        def app_hook(target: str, command: str) -> None:
            logger.info("app_command", target=target, command=command)

        orchestrator = Orchestrator(
            plan, backend, app_hook=app_hook, mode=ClockMode(mode), strict=strict, trace=trace
        )
        return orchestrator.run(injections)

    def viz(self, t: float) -> str:
        return render_svg(self.config.constellation, t)

    def validate(self, trace_path: Optional[str] = None, plan_path: Optional[str] = None) -> List[Violation]:
        """Collect violations of a trace file and/or a plan file."""
        violations: List[Violation] = []
        if trace_path is not None:
            found = validate_trace(trace_path)
            violations.extend(found)
            if not found and self.has_config:
                violations.extend(check_trace_matches(read_trace(trace_path), self.config))
        if plan_path is not None:
            violations.extend(validate_plan(load_plan(plan_path)))
        return violations


def _emit_output(text: str, out: Optional[str]) -> None:
    if out:
        save_text_to_file(text, out)
    else:
        click.echo(text, nl=False)


def _fail(code: int, lines: Iterable[str]) -> None:
    for line in lines:
        click.echo(line, err=True)
    sys.exit(code)


def _guarded(func):
    """Map library errors onto exit codes with one diagnostic per stderr line."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except click.ClickException:
            raise
        except FileIOError as e:
            _fail(EXIT_IO, [f"io-error: {e}"])
        except _ViolationsError as e:
            _fail(EXIT_INVALID, [str(v) for v in e.violations])
        except ConfigError as e:
            _fail(EXIT_INVALID, [f"config-error: {e}"])
        except (OrbitMeshError, ValueError) as e:
            _fail(EXIT_INVALID, [f"invalid: {e}"])
        except Exception as e:
            logger.exception("internal_error")
            _fail(EXIT_INTERNAL, [f"internal-error: {type(e).__name__}: {e}"])

    return wrapper


def _parse_sizes(value: str) -> List[int]:
    try:
        sizes = [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")
    if not sizes or min(sizes) < 2:
        raise click.BadParameter("sizes must be integers >= 2")
    return sizes


def _parse_injection(value: str) -> Injection:
    time_part, sep, rest = value.partition(":")
    name, _, payload = rest.partition(":")
    if not sep or not name:
        raise click.BadParameter(f"expected TIME_S:EVENT[:PAYLOAD], got {value!r}")
    try:
        return Injection(float(time_part), name, payload or None)
    except ValueError:
        raise click.BadParameter(f"bad injection time in {value!r}")


@click.group()
@click.option('--config', '-c', 'config_path', type=click.Path(), envvar='ORBITMESH_CONFIG',
              help='Main TOML configuration')
@click.option('--seed', type=int, envvar='ORBITMESH_SEED', default=None,
              help='Fabric seed (overrides fabric.seed)')
@click.option('--out', '-o', type=click.Path(), default=None,
              help='Output file or directory')
@click.option('--verbose', '-v', is_flag=True,
              help='Enable verbose output')
@click.pass_context
def cli(ctx, config_path, seed, out, verbose):
    """
    OrbitMesh - LEO edge testbed core.

    Examples:
        orbitmesh --config sim.toml --out sim.trace trace
        orbitmesh replay sim.trace --backend scan --plan-out plans/
        orbitmesh --out bench.csv bench --sizes 64,128,256,512
        orbitmesh orchestrate plan.toml --inject 400:sla_violation
    """
    configure_logging(verbose)
    ctx.obj = {"app": OrbitMesh(config_path, seed=seed, verbose=verbose), "out": out}


@cli.command()
@click.option('--duration', type=float, default=None, help='Trace length in seconds')
@click.option('--step', type=float, default=None, help='Epoch spacing in seconds')
@click.pass_context
@_guarded
def trace(ctx, duration, step):
    """Generate a topology trace from the configuration."""
    out = ctx.obj["out"]
    if not out:
        raise ConfigError("trace needs --out")
    result = ctx.obj["app"].trace(out, duration_s=duration, step_s=step)
    click.echo(f"Wrote {result.header.epochs} epochs for {result.header.machines} machines to {out}", err=True)


@cli.command(name="replay")
@click.argument('trace_path', type=click.Path())
@click.option('--backend', '-b', type=click.Choice(BACKEND_KINDS), default='hash',
              help='Fabric backend')
@click.option('--plan-out', type=click.Path(), default=None,
              help='Directory for per-epoch, per-host plan files')
@click.option('--plan-host', type=int, multiple=True,
              help='Only write plans for these machines')
@click.pass_context
@_guarded
def replay_command(ctx, trace_path, backend, plan_out, plan_host):
    """Replay a trace through a fabric backend (simulated clock)."""
    report = ctx.obj["app"].replay(trace_path, backend, plan_dir=plan_out, plan_hosts=plan_host)
    click.echo(f"Replayed {len(report.epochs)} epochs with {report.total_updates} link updates")


@cli.command()
@click.option('--backend', '-b', 'backends', type=click.Choice(BACKEND_KINDS), multiple=True,
              help='Backends to benchmark (default: all)')
@click.option('--sizes', default='64,128,256,512', help='Comma-separated machine counts')
@click.option('--reps', type=int, default=1, help='Repetitions per size')
@click.pass_context
@_guarded
def bench(ctx, backends, sizes, reps):
    """Benchmark link setup of the fabric backends."""
    results = ctx.obj["app"].bench(backends or BACKEND_KINDS, _parse_sizes(sizes), reps)
    _emit_output(render_csv(BENCH_CSV_HEADER, (stats.as_row() for stats in results)), ctx.obj["out"])


@cli.command()
@click.argument('plan_path', type=click.Path())
@click.option('--trace', 'trace_path', type=click.Path(), default=None,
              help='Preload the fabric with the first epoch of a trace')
@click.option('--mode', type=click.Choice([m.value for m in ClockMode]), default='simulated',
              help='Logical (instant) or wall-clock time')
@click.option('--backend', '-b', type=click.Choice(BACKEND_KINDS), default='hash',
              help='Fabric backend')
@click.option('--inject', multiple=True, help='External event as TIME_S:EVENT[:PAYLOAD]')
@click.option('--strict', is_flag=True, help='Abort on the first failed action')
@click.pass_context
@_guarded
def orchestrate(ctx, plan_path, trace_path, mode, backend, inject, strict):
    """Run an experiment plan and print its event log as CSV."""
    injections = [_parse_injection(value) for value in inject]
    log = ctx.obj["app"].orchestrate(plan_path, trace_path, mode, backend, injections, strict)
    _emit_output(log.to_csv(), ctx.obj["out"])


@cli.command()
@click.option('--t', 't_s', type=float, default=0.0, help='Time in seconds')
@click.pass_context
@_guarded
def viz(ctx, t_s):
    """Render the constellation at time T as an SVG map."""
    _emit_output(ctx.obj["app"].viz(t_s), ctx.obj["out"])


@cli.command()
@click.argument('trace_path', type=click.Path(), required=False)
@click.option('--plan', 'plan_path', type=click.Path(), default=None, help='Experiment plan to check')
@click.pass_context
@_guarded
def validate(ctx, trace_path, plan_path):
    """Validate a trace file and/or an experiment plan."""
    if trace_path is None and plan_path is None:
        raise ConfigError("validate needs a trace file or --plan")
    violations = ctx.obj["app"].validate(trace_path, plan_path)
    if violations:
        _fail(EXIT_INVALID, [str(v) for v in violations])
    click.echo("valid")


def main(argv: Optional[List[str]] = None) -> None:
    load_dotenv()
    cli.main(args=argv, prog_name="orbitmesh")


if __name__ == "__main__":
    main()
