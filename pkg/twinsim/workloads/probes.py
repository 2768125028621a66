"""Small two-thread programs that check memory-system guarantees."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..asm import AsmBuilder, assemble
from ..config import SimConfig
from ..isa import Program
from ..sim import Core, CoreConfig, Scenario
from .base import DATA_BASE, TEXT_BASE, WorkloadError, run_workload
from .mutexes import build_mutexes

PROBE_VALUE = 0x1234
READER_LOADS = 100


@dataclass
class Visibility:
    """Cycles at which thread 1 loaded the probed word, and what it saw."""

    store_cycle: int
    loads: list[tuple[int, int]] = field(default_factory=list)

    @property
    def first_seen(self) -> int:
        return min(c for c, v in self.loads if v == PROBE_VALUE)

    @property
    def last_stale(self) -> int:
        return max((c for c, v in self.loads if v != PROBE_VALUE), default=-1)

    @property
    def latency(self) -> int:
        return self.first_seen - self.store_cycle


def build_visibility_program(target: int = DATA_BASE, flag: int = DATA_BASE + 0x40) -> Program:
    """Thread 1 loads ``target`` every cycle from a warm instruction buffer;
    thread 0 stores to it once thread 1 raises ``flag`` to 1."""
    b = AsmBuilder()
    b.directive(".org", f"{TEXT_BASE:#x}")
    b.directive(".global", "probe_writer")
    b.directive(".global", "probe_reader")
    b.label("probe_writer")
    b.ops(
        f"""
        li r4, {target:#x}
        li r8, {flag:#x}
        li r9, 1
        li r5, {PROBE_VALUE:#x}
        lw r1, 0(r4)
        pw_wait:
        lw r2, 0(r8)
        bne r2, r9, pw_wait
        sw r5, 0(r4)
        halt
        """
    )
    b.label("probe_reader")
    b.ops(
        f"""
        li r4, {target:#x}
        li r8, {flag:#x}
        li r7, 2
        pr_pass:
        sw r7, 0(r8)
        """
    )
    for _ in range(READER_LOADS):
        b.op("lw r1, 0(r4)")
    b.ops(
        """
        addi r7, r7, -1
        bne r7, r0, pr_pass
        halt
        """
    )
    return assemble(b.source())


def store_visibility_probe(sim: SimConfig | None = None) -> Visibility:
    """Measure when thread 1 first observes a store made by thread 0."""
    sim = sim or SimConfig()
    target = DATA_BASE
    program = build_visibility_program(target)
    core = Core(CoreConfig.from_sim_config(sim, Scenario.DUAL, service=False))
    core.load(program)
    stores: list[int] = []
    loads: list[tuple[int, int]] = []

    def on_store(tid: int, addr: int, width: int, value: int, cycle: int) -> None:
        if tid == 0 and addr == target:
            stores.append(cycle)

    def on_load(tid: int, addr: int, width: int, value: int, cycle: int) -> None:
        if tid == 1 and addr == target:
            loads.append((cycle, value))

    core.add_store_observer(on_store)
    core.mem.add_load_observer(on_load)
    core.start({0: program.entry_points["probe_writer"], 1: program.entry_points["probe_reader"]})
    core.advance()
    result = core.result()
    if not result.ok or len(stores) != 1:
        raise WorkloadError(f"visibility probe did not complete: {result.exit_kind}, {len(stores)} stores")
    return Visibility(stores[0], loads)


def tas_counter_probe(per_thread: int = 64, sim: SimConfig | None = None) -> tuple[int, int]:
    """Both threads add ``per_thread`` to a TAS-protected counter.

    Returns (final counter, expected counter).
    """
    workload = build_mutexes(2 * per_thread, sim)
    result = run_workload(workload, Scenario.DUAL, sim)
    if not result.ok:
        raise WorkloadError(f"TAS probe did not halt: {result.exit_kind}")
    return result.memory.read_word(workload.data["counter"]), 2 * per_thread
