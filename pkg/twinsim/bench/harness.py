"""Scenario x workload evaluation matrix."""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from .. import __version__
from ..config import SimConfig
from ..logging import get_logger
from ..sidekick import ChannelLayout, ChannelProbe, RoundTrip
from ..sim import Fault, Scenario, StallCause
from ..workloads import SUITE, WorkloadError, build, run_workload

SCENARIOS: tuple[Scenario, ...] = (
    Scenario.SINGLE,
    Scenario.INACTIVE,
    Scenario.SPINNING,
    Scenario.DUAL,
)

# Every value CellResult.status can take; "fault" and "max_cycles" come from the run exit.
CELL_STATUSES: tuple[str, ...] = ("ok", "error", "fault", "max_cycles", "oracle_failure", "invariant")


def parse_scenarios(names: Iterable[str]) -> tuple[Scenario, ...]:
    """``["all"]`` or scenario values; result keeps the canonical order."""
    wanted = {n.strip() for n in names if n.strip()}
    if not wanted or "all" in wanted:
        return SCENARIOS
    known = {s.value: s for s in SCENARIOS}
    unknown = sorted(wanted - set(known))
    if unknown:
        raise WorkloadError(f"unknown scenario(s): {', '.join(unknown)} (known: {', '.join(known)})")
    return tuple(s for s in SCENARIOS if s.value in wanted)


def parse_workloads(names: Iterable[str]) -> tuple[str, ...]:
    wanted = [n.strip() for n in names if n.strip()]
    if not wanted or "all" in wanted:
        return SUITE
    unknown = [n for n in wanted if n not in SUITE]
    if unknown:
        raise WorkloadError(f"unknown workload(s): {', '.join(unknown)} (known: {', '.join(SUITE)})")
    return tuple(n for n in SUITE if n in wanted)


@dataclass
class CellResult:
    """One simulation: a workload in one scenario."""

    workload: str
    scenario: str
    status: str
    sizes: dict[str, int] = field(default_factory=dict)
    total_cycles: int = 0
    problems: list[str] = field(default_factory=list)
    stats: dict[str, Any] = field(default_factory=dict)
    dcache_miss_rate: float = 0.0
    blocked_by_other_miss: list[int] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    # host seconds; not written to the report
    wall_seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "status": self.status,
            "total_cycles": self.total_cycles,
            "dcache_miss_rate": round(self.dcache_miss_rate, 6),
            "blocked_by_other_miss": list(self.blocked_by_other_miss),
            "stats": self.stats,
        }
        if self.problems:
            data["problems"] = list(self.problems)
        if self.extra:
            data["extra"] = self.extra
        if self.warnings:
            data["warnings"] = list(self.warnings)
        return data


def run_cell(
    name: str,
    scenario: Scenario,
    sim: SimConfig,
    sizes: Mapping[str, int] | None = None,
    quick: bool = False,
) -> CellResult:
    """Build, run and check one cell. Never raises for simulated failures."""
    try:
        workload = build(name, sizes, sim, quick)
    except WorkloadError as exc:
        return CellResult(name, scenario.value, "error", problems=[str(exc)])

    probe = ChannelProbe(ChannelLayout(workload.channel_base))
    result = run_workload(workload, scenario, sim, probe=probe)
    cell = CellResult(
        name,
        scenario.value,
        "ok",
        sizes=dict(workload.sizes),
        total_cycles=result.total_cycles,
        stats=result.stats.to_dict(),
        warnings=list(result.warnings),
    )
    accesses = sum(t.dcache_accesses for t in result.stats.threads)
    hits = sum(t.dcache_hits for t in result.stats.threads)
    cell.dcache_miss_rate = 1.0 - hits / accesses if accesses else 0.0
    cell.blocked_by_other_miss = [
        t.stall_cycles[StallCause.BLOCKED_BY_OTHER_MISS] for t in result.stats.threads
    ]

    if not result.ok:
        cell.status = result.exit_kind
        if isinstance(result.exit, Fault):
            cell.problems.append(result.exit.describe())
        else:
            cell.problems.append(f"run ended with {result.exit_kind}")
        return cell

    cell.problems += workload.check(result.memory)
    if cell.problems:
        cell.status = "oracle_failure"
    cell.problems += result.stats.check()
    atomics = sum(t.atomic_ops for t in result.stats.threads)
    if atomics and not workload.uses_atomics:
        cell.problems.append(f"{atomics} atomic operations in a lock-free workload")
    cell.problems += probe.violations
    if cell.problems and cell.status == "ok":
        cell.status = "invariant"
    if workload.report is not None:
        cell.extra = workload.report(result.memory)
    return cell


def _run_cell_job(job: tuple[str, str, SimConfig, dict[str, int], bool]) -> CellResult:
    name, scenario, sim, sizes, quick = job
    started = time.perf_counter()
    cell = run_cell(name, Scenario(scenario), sim, sizes, quick)
    cell.wall_seconds = time.perf_counter() - started
    return cell


@dataclass
class WorkloadRow:
    name: str
    sizes: dict[str, int]
    cells: dict[str, CellResult] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.cells.values())

    @property
    def speedup(self) -> float | None:
        """cycles(single) / cycles(dual), when both cells ran cleanly."""
        single = self.cells.get(Scenario.SINGLE.value)
        dual = self.cells.get(Scenario.DUAL.value)
        if single is None or dual is None or not (single.ok and dual.ok) or not dual.total_cycles:
            return None
        return single.total_cycles / dual.total_cycles

    def cycles(self, scenario: Scenario) -> int | None:
        cell = self.cells.get(scenario.value)
        return cell.total_cycles if cell is not None and cell.ok else None

    def to_dict(self) -> dict[str, Any]:
        speedup = self.speedup
        return {
            "sizes": self.sizes,
            "ok": self.ok,
            "speedup": None if speedup is None else round(speedup, 6),
            "scenarios": {k: c.to_dict() for k, c in self.cells.items()},
        }


@dataclass
class BenchReport:
    config: SimConfig
    seed: int | None
    quick: bool
    scenarios: tuple[Scenario, ...]
    rows: list[WorkloadRow] = field(default_factory=list)
    roundtrip: RoundTrip | None = None

    @property
    def ok(self) -> bool:
        return all(row.ok for row in self.rows)

    def failures(self) -> list[tuple[str, str, list[str]]]:
        return [
            (row.name, cell.scenario, cell.problems)
            for row in self.rows
            for cell in row.cells.values()
            if not cell.ok
        ]

    def failure_statuses(self) -> list[tuple[str, str]]:
        return [(row.name, c.status) for row in self.rows for c in row.cells.values() if not c.ok]

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "metadata": {
                "version": __version__,
                "config_digest": self.config.digest(),
                "config": self.config.to_mapping(),
                "seed": self.seed,
                "quick": self.quick,
                "scenarios": [s.value for s in self.scenarios],
            },
            "workloads": {row.name: row.to_dict() for row in self.rows},
        }
        if self.roundtrip is not None:
            data["roundtrip"] = self.roundtrip.to_dict()
        return data


def run_bench(
    workloads: Sequence[str] = SUITE,
    scenarios: Sequence[Scenario] = SCENARIOS,
    sim: SimConfig | None = None,
    *,
    sizes: Mapping[str, Mapping[str, int]] | None = None,
    seed: int | None = None,
    quick: bool = False,
    jobs: int = 1,
) -> BenchReport:
    """Run every (workload, scenario) cell; cells run in a process pool when
    ``jobs > 1``, report assembly stays in submission order."""
    sim = sim or SimConfig()
    jobs_list: list[tuple[str, str, SimConfig, dict[str, int], bool]] = []
    for name in workloads:
        params = dict((sizes or {}).get(name, {}))
        if seed is not None:
            params["seed"] = seed
        for scenario in scenarios:
            jobs_list.append((name, scenario.value, sim, params, quick))

    logger = get_logger()
    jobs = min(jobs, len(jobs_list))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_cell_job, jobs_list))
    else:
        cells = [_run_cell_job(job) for job in jobs_list]

    report = BenchReport(sim, seed, quick, tuple(scenarios))
    rows: dict[str, WorkloadRow] = {}
    for (name, *_), cell in zip(jobs_list, cells, strict=True):
        row = rows.get(name)
        if row is None:
            row = rows[name] = WorkloadRow(name, dict(cell.sizes))
            report.rows.append(row)
        row.cells[cell.scenario] = cell
        logger.log_bench_cell(name, cell.scenario, cell.status, cell.total_cycles, cell.wall_seconds)
        if cell.status == "oracle_failure":
            logger.log_oracle_failure(name, cell.problems, cell.scenario)
    return report


__all__ = [
    "SCENARIOS",
    "BenchReport",
    "CellResult",
    "WorkloadRow",
    "parse_scenarios",
    "parse_workloads",
    "run_bench",
    "run_cell",
]
