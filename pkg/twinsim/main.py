"""twinsim CLI entry point."""

from __future__ import annotations

import os
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any, NoReturn

import click
from rich.console import Console

from . import __version__
from .asm import AssemblyError, assemble, disassemble
from .bench import SCENARIOS, BenchReport, parse_scenarios, parse_workloads, run_bench, write_report
from .config import ConfigError, SimConfig
from .isa import ImageFormatError, Program, read_image, write_image
from .logging import get_logger, init_logger
from .sidekick import ChannelError, measure_roundtrip
from .sim import Core, CoreConfig, RunResult, Scenario
from .ui import render
from .utils import AtomicFileWriter
from .workloads import REGISTRY, WorkloadError, build, parse_sizes, run_workload
from .workloads.base import ENTRY_DUAL, ENTRY_SINGLE

console = Console()
err_console = Console(stderr=True)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ASM = 2
EXIT_FAULT = 3
EXIT_ORACLE = 4


def _fail(message: str, code: int, kind: str = "error") -> NoReturn:
    err_console.print(render.render_error(message, kind))
    get_logger().log_error(message, exit_code=code)
    sys.exit(code)


class TwinsimGroup(click.Group):
    """Click group that reports usage errors with exit code 1 instead of 2."""

    def main(self, *args: Any, standalone_mode: bool = True, **kwargs: Any) -> Any:
        try:
            rv = super().main(*args, standalone_mode=False, **kwargs)
        except click.ClickException as exc:
            exc.show()
            sys.exit(EXIT_USAGE)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        if not standalone_mode:
            return rv
        sys.exit(rv if isinstance(rv, int) else EXIT_OK)


def _load_config(path: str | None, **overrides: Any) -> SimConfig:
    try:
        sim = SimConfig.load(path)
        changes = {k: v for k, v in overrides.items() if v is not None}
        return sim.with_overrides(**changes) if changes else sim
    except ConfigError as exc:
        _fail(str(exc), EXIT_ASM, "config")


def config_options(fn: Callable[..., Any]) -> Callable[..., Any]:
    """--config and --log, shared by every command that simulates."""
    fn = click.option(
        "--log",
        "log",
        is_flag=True,
        default=False,
        help="Write a JSONL event log to ~/.twinsim/logs/",
    )(fn)
    fn = click.option(
        "--config",
        "config_path",
        type=click.Path(dir_okay=False),
        default=None,
        help="Config file (JSON); defaults to $TWINSIM_CONFIG, then built-ins",
    )(fn)
    return fn


def _sizes(items: Sequence[str]) -> dict[str, int]:
    try:
        return parse_sizes(list(items))
    except WorkloadError as exc:
        raise click.BadParameter(str(exc), param_hint="--size") from None


def _load_program(path: Path) -> Program:
    """``.bin`` files are images; anything else is assembly source."""
    try:
        if path.suffix == ".bin":
            return read_image(path.read_bytes())
        return assemble(path.read_text(encoding="utf-8"))
    except AssemblyError as exc:
        for error in exc.errors:
            err_console.print(render.render_error(f"{path}: {error}", "asm"))
        sys.exit(EXIT_ASM)
    except ImageFormatError as exc:
        _fail(f"{path}: {exc}", EXIT_ASM, "image")
    except OSError as exc:
        _fail(f"cannot read {path}: {exc}", EXIT_USAGE)


@click.group(cls=TwinsimGroup)
@click.version_option(version=__version__)
def cli() -> None:
    """twinsim - cycle-level simulator of a dual-threaded in-order core."""


# ---------------------------------------------------------------------------
# asm
# ---------------------------------------------------------------------------


@cli.command("asm")
@click.argument("source", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("-o", "--output", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--disasm", is_flag=True, help="Read a binary image and print re-assemblable source")
def cmd_asm(source: Path, output: Path | None, disasm: bool) -> None:
    """Assemble SOURCE into a binary image, or disassemble an image."""
    if disasm:
        try:
            program = read_image(source.read_bytes())
        except ImageFormatError as exc:
            _fail(f"{source}: {exc}", EXIT_ASM, "image")
        text = disassemble(program)
        if output is None:
            click.echo(text, nl=False)
        else:
            AtomicFileWriter.write(output, text)
        return

    program = _load_program(source)
    target = output or source.with_suffix(".bin")
    AtomicFileWriter.write_bytes(target, write_image(program))
    err_console.print(
        f"[green]{len(program.words)} words[/] at {program.base_address:#x} -> {target}"
    )


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def _resolve_entry(token: str, programs: Sequence[Program]) -> int:
    try:
        return int(token, 0)
    except ValueError:
        pass
    for program in programs:
        try:
            return program.address_of(token)
        except KeyError:
            continue
    raise click.BadParameter(f"no label {token!r} in the loaded images", param_hint="--entry")


def _default_entries(programs: Sequence[Program], scenario: Scenario) -> dict[int, str]:
    labels: set[str] = set()
    for program in programs:
        labels |= set(program.entry_points) | set(program.symbols)
    preferred = (ENTRY_DUAL, "main") if scenario is Scenario.DUAL else (ENTRY_SINGLE, "main")
    entries: dict[int, str] = {}
    for label in preferred:
        if label in labels:
            entries[0] = label
            break
    else:
        entries[0] = str(programs[0].base_address)
    if "sk_dispatch" in labels:
        entries[1] = "sk_dispatch"
    return entries


def _parse_data(items: Sequence[str]) -> list[tuple[int, bytes]]:
    segments = []
    for item in items:
        addr, sep, path = item.partition("=")
        if not sep:
            raise click.BadParameter(f"{item!r} is not ADDR=FILE", param_hint="--data")
        try:
            segments.append((int(addr, 0), Path(path).read_bytes()))
        except ValueError:
            raise click.BadParameter(f"bad address {addr!r}", param_hint="--data") from None
        except OSError as exc:
            raise click.BadParameter(str(exc), param_hint="--data") from None
    return segments


def _report_run(result: RunResult, title: str, stats_path: Path | None) -> None:
    if stats_path is not None:
        AtomicFileWriter.write_json(stats_path, result.to_dict())
    console.print(render.render_run_summary(result, title))
    console.print(render.render_stall_breakdown(result))
    for warning in result.warnings:
        err_console.print(render.render_error(warning, "warning"))
    if not result.ok:
        err_console.print(render.render_fault(result))
        sys.exit(EXIT_FAULT)


@cli.command("run")
@click.argument("images", nargs=-1, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option(
    "--scenario",
    type=click.Choice([s.value for s in SCENARIOS]),
    default=Scenario.SINGLE.value,
    show_default=True,
)
@click.option("--workload", "workload_name", default=None, help="Run a built-in workload instead")
@click.option("--size", "sizes", multiple=True, help="Workload size override key=value")
@click.option("--max-cycles", type=int, default=None)
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--stats", "stats_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--entry", default=None, help="Thread 0 entry label or address")
@click.option("--entry1", default=None, help="Thread 1 entry label or address")
@click.option("--data", "data_items", multiple=True, help="Preload raw bytes: ADDR=FILE")
@config_options
def cmd_run(
    images: tuple[Path, ...],
    scenario: str,
    workload_name: str | None,
    sizes: tuple[str, ...],
    max_cycles: int | None,
    trace_path: Path | None,
    stats_path: Path | None,
    entry: str | None,
    entry1: str | None,
    data_items: tuple[str, ...],
    config_path: str | None,
    log: bool,
) -> None:
    """Run one simulation of IMAGES (.s or .bin) or of a built-in workload."""
    logger = init_logger(enabled=log)
    sim = _load_config(config_path, max_cycles=max_cycles)
    chosen = Scenario(scenario)
    if bool(images) == bool(workload_name):
        raise click.UsageError("give either image files or --workload")

    trace = trace_path.open("w", encoding="utf-8") if trace_path is not None else None
    try:
        if workload_name is not None:
            try:
                workload = build(workload_name, _sizes(sizes), sim)
            except WorkloadError as exc:
                raise click.BadParameter(str(exc), param_hint="--workload") from None
            logger.log_run_start(workload.name, chosen.value, sim.digest())
            result = run_workload(workload, chosen, sim, trace=trace)
            logger.log_run_end(workload.name, chosen.value, result.exit_kind, result.total_cycles)
            _report_run(result, f"{workload.name} / {chosen.value}", stats_path)
            problems = workload.check(result.memory)
            if problems:
                logger.log_oracle_failure(workload.name, problems, chosen.value)
                _fail("; ".join(problems[:5]), EXIT_ORACLE, "oracle")
            return

        programs = [_load_program(path) for path in images]
        defaults = _default_entries(programs, chosen)
        entries = {0: _resolve_entry(entry or defaults[0], programs)}
        if chosen in (Scenario.SPINNING, Scenario.DUAL):
            token = entry1 or defaults.get(1)
            if token is None:
                raise click.UsageError(f"scenario {chosen.value} needs --entry1")
            entries[1] = _resolve_entry(token, programs)

        core = Core(CoreConfig.from_sim_config(sim, chosen), trace=trace)
        for program in programs:
            core.load(program)
        for addr, blob in _parse_data(data_items):
            core.mem.write_bytes(addr, blob)
        name = images[0].stem
        logger.log_run_start(name, chosen.value, sim.digest())
        core.start(entries)
        core.advance()
        result = core.result()
        logger.log_run_end(name, chosen.value, result.exit_kind, result.total_cycles)
        _report_run(result, f"{name} / {chosen.value}", stats_path)
    finally:
        if trace is not None:
            trace.close()


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _bench_sizes(items: Sequence[str]) -> dict[str, dict[str, int]]:
    """``matrix_mult.n=64`` -> ``{"matrix_mult": {"n": 64}}``."""
    out: dict[str, dict[str, int]] = {}
    for item in items:
        name, dot, rest = item.partition(".")
        if not dot:
            raise click.BadParameter(f"{item!r} is not workload.key=value", param_hint="--size")
        out.setdefault(name, {}).update(_sizes([rest]))
    return out


def _bench_exit_code(report: BenchReport) -> int:
    """Worst failure wins: oracle (4) over fault (3) over build error (1)."""
    code = EXIT_OK
    for _, status in report.failure_statuses():
        if status == "error":
            code = max(code, EXIT_USAGE)
        elif status in ("fault", "max_cycles"):
            code = max(code, EXIT_FAULT)
        else:
            code = max(code, EXIT_ORACLE)
    return code


@cli.command("bench")
@click.option("--workloads", "workload_names", default="all", show_default=True, help="Comma list or 'all'")
@click.option("--scenarios", "scenario_names", default="all", show_default=True, help="Comma list or 'all'")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--seed", type=int, default=None, help="Override every workload's input seed")
@click.option("--size", "sizes", multiple=True, help="Size override workload.key=value")
@click.option("--quick", is_flag=True, help="Small sizes for a fast smoke run")
@click.option("--jobs", "-j", type=int, default=None, help="Worker processes [default: CPU count]")
@click.option("--roundtrip-reps", type=int, default=100, show_default=True, help="0 skips the side-kick probe")
@config_options
def cmd_bench(
    workload_names: str,
    scenario_names: str,
    out_path: Path | None,
    csv_path: Path | None,
    seed: int | None,
    sizes: tuple[str, ...],
    quick: bool,
    jobs: int | None,
    roundtrip_reps: int,
    config_path: str | None,
    log: bool,
) -> None:
    """Run the workload x scenario matrix and write the reports."""
    init_logger(enabled=log)
    sim = _load_config(config_path)
    try:
        names = parse_workloads(workload_names.split(","))
        scenarios = parse_scenarios(scenario_names.split(","))
    except WorkloadError as exc:
        raise click.UsageError(str(exc)) from None
    per_workload = _bench_sizes(sizes)
    unknown = sorted(set(per_workload) - set(names))
    if unknown:
        raise click.BadParameter(f"size given for workload(s) not in the run: {', '.join(unknown)}", param_hint="--size")
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs < 1:
        raise click.BadParameter("must be at least 1", param_hint="--jobs")

    report = run_bench(names, scenarios, sim, sizes=per_workload, seed=seed, quick=quick, jobs=jobs)
    if roundtrip_reps > 0:
        try:
            report.roundtrip = measure_roundtrip(sim, roundtrip_reps)
        except ChannelError as exc:
            err_console.print(render.render_error(str(exc), "roundtrip"))
    write_report(report, out_path, csv_path)

    console.print(render.render_bench_matrix(report))
    if report.roundtrip is not None:
        console.print(render.render_roundtrip(report.roundtrip))
    failures = render.render_failures(report)
    if failures is not None:
        err_console.print(failures)
        sys.exit(_bench_exit_code(report))


# ---------------------------------------------------------------------------
# roundtrip / workloads / export
# ---------------------------------------------------------------------------


@cli.command("roundtrip")
@click.option("--reps", type=int, default=1000, show_default=True)
@click.option("--overlap", type=int, default=0, help="ALU ops between invoke and wait")
@click.option("--task-ops", type=int, default=0, help="ALU ops inside the remote task")
@click.option("--json", "json_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@config_options
def cmd_roundtrip(
    reps: int,
    overlap: int,
    task_ops: int,
    json_path: Path | None,
    config_path: str | None,
    log: bool,
) -> None:
    """Measure the side-kick invoke/wait latency."""
    init_logger(enabled=log)
    sim = _load_config(config_path)
    if reps < 1:
        raise click.BadParameter("must be at least 1", param_hint="--reps")
    try:
        rt = measure_roundtrip(sim, reps, overlap_ops=overlap, task_ops=task_ops)
    except ChannelError as exc:
        _fail(str(exc), EXIT_FAULT, "roundtrip")
    if json_path is not None:
        AtomicFileWriter.write_json(json_path, {**rt.to_dict(), "violations": list(rt.violations)})
    console.print(render.render_roundtrip(rt))
    if rt.violations:
        sys.exit(EXIT_ORACLE)


@cli.command("workloads")
def cmd_workloads() -> None:
    """List the built-in workloads and their default sizes."""
    console.print(render.render_workload_list(REGISTRY))


@cli.command("export")
@click.argument("name")
@click.option(
    "--out-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("."),
    show_default=True,
)
@click.option("--size", "sizes", multiple=True, help="Size override key=value")
@click.option("--quick", is_flag=True)
@config_options
def cmd_export(
    name: str,
    out_dir: Path,
    sizes: tuple[str, ...],
    quick: bool,
    config_path: str | None,
    log: bool,
) -> None:
    """Write a workload's source, image, data segments and manifest."""
    init_logger(enabled=log)
    sim = _load_config(config_path)
    try:
        workload = build(name, _sizes(sizes), sim, quick)
    except WorkloadError as exc:
        raise click.BadParameter(str(exc), param_hint="NAME") from None

    AtomicFileWriter.write(out_dir / f"{name}.s", workload.source)
    AtomicFileWriter.write_bytes(out_dir / f"{name}.bin", write_image(workload.program))
    manifest = workload.manifest()
    files = []
    for addr, blob in workload.data.segments:
        filename = f"{name}.{addr:08x}.dat"
        AtomicFileWriter.write_bytes(out_dir / filename, blob)
        files.append({"addr": addr, "file": filename})
    manifest["data_files"] = files
    AtomicFileWriter.write_json(out_dir / f"{name}.json", manifest)
    err_console.print(f"[green]exported[/] {name} -> {out_dir}")


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
