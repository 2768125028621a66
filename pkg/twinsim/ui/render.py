"""Rich renderables for simulator results.

Pure functions: data in, renderable out. The CLI prints them; tests record
them with a ``Console(record=True)``.
"""

from __future__ import annotations

from collections.abc import Mapping

from rich import box
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from ..bench import SCENARIOS, BenchReport
from ..sidekick import REFERENCE_CYCLES, RoundTrip
from ..sim import Fault, RunResult, StallCause
from ..workloads import WorkloadSpec
from . import theme


def _rate(hits: int, accesses: int) -> str:
    if not accesses:
        return "-"
    return f"{100.0 * hits / accesses:.1f}%"


def _status_style(status: str) -> str:
    return theme.STATUS_COLORS.get(status, theme.ROLE_COLORS["error"])


def _speedup_text(value: float | None) -> Text:
    if value is None:
        return Text("-", style=theme.ROLE_COLORS["muted"])
    if value < 1.0:
        color = theme.ROLE_COLORS["error"]
    elif value < theme.SPEEDUP_GOOD:
        color = theme.ROLE_COLORS["warning"]
    else:
        color = theme.ROLE_COLORS["success"]
    return Text(f"{value:.2f}x", style=f"bold {color}")


# ---------------------------------------------------------------------------
# Single run
# ---------------------------------------------------------------------------


def render_run_summary(result: RunResult, title: str = "run") -> Table:
    """Per-thread counters with the exit reason and total cycles in the title."""
    color = theme.ROLE_COLORS["success"] if result.ok else theme.ROLE_COLORS["error"]
    table = Table(
        title=Text.assemble(
            (f"{title}: ", f"bold {theme.ROLE_COLORS['title']}"),
            (result.exit_kind, f"bold {color}"),
            (f"  {result.total_cycles:,} cycles", theme.ROLE_COLORS["muted"]),
        ),
        box=box.ROUNDED,
    )
    table.add_column("thread", style=theme.ROLE_COLORS["thread"])
    table.add_column("active", justify="right")
    table.add_column("retired", justify="right")
    table.add_column("icache hit", justify="right")
    table.add_column("dcache hit", justify="right")
    table.add_column("ibuf hits", justify="right")
    table.add_column("mispredicts", justify="right")
    table.add_column("stalls", justify="right")
    for tid, t in enumerate(result.stats.threads):
        table.add_row(
            str(tid),
            f"{t.cycles_active:,}",
            f"{t.instructions_retired:,}",
            _rate(t.icache_hits, t.icache_accesses),
            _rate(t.dcache_hits, t.dcache_accesses),
            f"{t.ibuf_hits:,}",
            f"{t.mispredicts:,}",
            f"{t.total_stalls:,}",
        )
    return table


def render_stall_breakdown(result: RunResult) -> Table:
    """Stall cycles by cause, one column per thread; all-zero causes are skipped."""
    threads = result.stats.threads
    table = Table(title="stall cycles", box=box.ROUNDED)
    table.add_column("cause")
    for tid in range(len(threads)):
        table.add_column(f"t{tid}", justify="right")
    for cause in StallCause:
        counts = [t.stall_cycles[cause] for t in threads]
        if any(counts):
            table.add_row(cause.value, *(f"{n:,}" for n in counts))
    return table


def render_fault(result: RunResult) -> Panel:
    if isinstance(result.exit, Fault):
        body = result.exit.describe()
    else:
        body = f"run ended with {result.exit_kind}"
    return Panel(
        Text(body),
        title=Text(f"{theme.FAIL_MARK} {result.exit_kind}", style=f"bold {theme.ROLE_COLORS['error']}"),
        title_align="left",
        border_style=theme.ROLE_COLORS["error"],
        box=box.ROUNDED,
        padding=(0, 1),
    )


# ---------------------------------------------------------------------------
# Bench matrix
# ---------------------------------------------------------------------------


def render_bench_matrix(report: BenchReport) -> Table:
    """Workloads down, scenarios across, speedup last."""
    table = Table(
        title=Text(f"total cycles  (config {report.config.digest()})", style=theme.ROLE_COLORS["title"]),
        box=box.ROUNDED,
    )
    table.add_column("workload", style=theme.ROLE_COLORS["thread"])
    shown = [s for s in SCENARIOS if s in report.scenarios]
    for scenario in shown:
        table.add_column(theme.SCENARIO_HEADERS[scenario.value], justify="right")
    table.add_column("speedup", justify="right")
    table.add_column("dcache miss", justify="right")
    for row in report.rows:
        cells: list[Text] = []
        for scenario in shown:
            cell = row.cells.get(scenario.value)
            if cell is None:
                cells.append(Text("-", style=theme.ROLE_COLORS["muted"]))
            elif cell.ok:
                cells.append(Text(f"{cell.total_cycles:,}"))
            else:
                cells.append(Text(cell.status, style=f"bold {_status_style(cell.status)}"))
        dual = row.cells.get("dual") or next(iter(row.cells.values()), None)
        miss = "-" if dual is None else f"{100.0 * dual.dcache_miss_rate:.1f}%"
        table.add_row(row.name, *cells, _speedup_text(row.speedup), miss)
    return table


def render_failures(report: BenchReport, limit: int = 3) -> Panel | None:
    """Problems of every failed cell, or ``None`` when the matrix is clean."""
    failures = report.failures()
    if not failures:
        return None
    body = Text()
    for name, scenario, problems in failures:
        body.append(f"{name} / {scenario}\n", style="bold")
        for problem in problems[:limit]:
            body.append(f"  {problem}\n")
        if len(problems) > limit:
            body.append(f"  (+{len(problems) - limit} more)\n", style=theme.ROLE_COLORS["muted"])
    return Panel(
        body,
        title=Text(f"{theme.FAIL_MARK} {len(failures)} failed cell(s)", style=f"bold {theme.ROLE_COLORS['error']}"),
        title_align="left",
        border_style=theme.ROLE_COLORS["error"],
        box=box.ROUNDED,
        padding=(0, 1),
    )


# ---------------------------------------------------------------------------
# Side-kick round trip
# ---------------------------------------------------------------------------


def render_roundtrip(rt: RoundTrip) -> Panel:
    steady = rt.constant and not rt.violations
    color = theme.ROLE_COLORS["success"] if steady else theme.ROLE_COLORS["warning"]
    body = Text.assemble(
        ("reps       ", theme.ROLE_COLORS["muted"]),
        (f"{len(rt.samples)}\n", ""),
        ("min/max    ", theme.ROLE_COLORS["muted"]),
        (f"{rt.min} / {rt.max} cycles\n", "bold"),
        ("median     ", theme.ROLE_COLORS["muted"]),
        (f"{rt.median:g}\n", ""),
        ("reference  ", theme.ROLE_COLORS["muted"]),
        (f"{REFERENCE_CYCLES} cycles", ""),
    )
    if rt.free_running:
        body.append("\nfree-run   ", style=theme.ROLE_COLORS["muted"])
        body.append(f"{rt.free_min} / {rt.free_max} cycles")
    for violation in rt.violations[:3]:
        body.append(f"\n{violation}", style=theme.ROLE_COLORS["error"])
    mark = theme.OK_MARK if steady else theme.FAIL_MARK
    return Panel(
        body,
        title=Text(f"{mark} side-kick round trip", style=f"bold {color}"),
        title_align="left",
        border_style=color,
        box=box.ROUNDED,
        padding=(0, 1),
    )


# ---------------------------------------------------------------------------
# Workload list / diagnostics
# ---------------------------------------------------------------------------


def render_workload_list(specs: Mapping[str, WorkloadSpec]) -> Table:
    table = Table(title="workloads", box=box.ROUNDED)
    table.add_column("name", style=theme.ROLE_COLORS["thread"])
    table.add_column("sizes")
    table.add_column("quick", style=theme.ROLE_COLORS["muted"])
    table.add_column("description")
    for name, spec in specs.items():
        table.add_row(
            name,
            " ".join(f"{k}={v}" for k, v in spec.defaults.items()),
            " ".join(f"{k}={v}" for k, v in spec.quick.items()),
            spec.description,
        )
    return table


def render_error(message: str, kind: str = "error") -> Text:
    return Text.assemble(
        (f"{theme.FAIL_MARK} {kind}: ", f"bold {theme.ROLE_COLORS['error']}"),
        (message, ""),
    )
