"""Invocation round-trip measurement on the simulated core."""

from __future__ import annotations

import statistics
from collections.abc import Sequence
from dataclasses import dataclass

from ..asm import AsmBuilder, assemble
from ..config import SimConfig
from ..isa import Program
from ..sim import Core, CoreConfig, RunResult, Scenario
from .channel import ChannelError, ChannelLayout, ChannelProbe, TaskTable
from .codegen import DISPATCH_LABEL, Arg, emit_dispatcher, emit_invoke, emit_task_table, emit_wait

TEXT_BASE = 0x1000
RESULTS_BASE = 0x0010_0000
SCRATCH_BASE = 0x0020_0000
REFERENCE_CYCLES = 25

PROBE_TASK = "rt_task"


@dataclass(frozen=True)
class RoundTrip:
    """Per-invocation cycle counts, warm-up excluded.

    ``samples`` come from repetitions that each start behind a cold miss,
    which puts the dispatcher at the same spin phase every time;
    ``free_running`` repeats the loop without that miss.
    """

    samples: tuple[int, ...]
    violations: tuple[str, ...] = ()
    atomic_ops: int = 0
    free_running: tuple[int, ...] = ()

    @property
    def min(self) -> int:
        return min(self.samples)

    @property
    def max(self) -> int:
        return max(self.samples)

    @property
    def median(self) -> float:
        return statistics.median(self.samples)

    @property
    def constant(self) -> bool:
        return self.min == self.max

    @property
    def free_min(self) -> int | None:
        return min(self.free_running, default=None)

    @property
    def free_max(self) -> int | None:
        return max(self.free_running, default=None)

    def to_dict(self) -> dict:
        data = {
            "reps": len(self.samples),
            "min": self.min,
            "median": self.median,
            "max": self.max,
            "reference": REFERENCE_CYCLES,
        }
        if self.free_running:
            data["free_running"] = {"min": self.free_min, "max": self.free_max}
        return data


def build_roundtrip_program(
    reps: int,
    layout: ChannelLayout,
    *,
    spin_delay: int = 6,
    fn_id: int = 0,
    args: Sequence[Arg] = (),
    overlap_ops: int = 0,
    task_ops: int = 0,
    resync: bool = True,
) -> Program:
    """Thread 0 times ``reps + 1`` invocations; thread 1 runs the dispatcher.

    With ``resync`` each repetition starts with a load from a line that was
    never touched, so the blocking miss lines both threads up at the same
    phase.
    ``overlap_ops`` ALU ops run between invoke and wait; fn_id 1 is a task
    that runs ``task_ops`` ALU ops.
    """
    if reps < 1:
        raise ChannelError("reps must be at least 1")
    table = TaskTable.of([PROBE_TASK])
    b = AsmBuilder()
    b.directive(".org", f"{TEXT_BASE:#x}")
    b.directive(".global", "main")
    b.directive(".global", DISPATCH_LABEL)
    b.label("main")
    b.ops(
        f"""
        li r16, {reps + 1}
        li r18, {RESULTS_BASE:#x}
        li r19, {SCRATCH_BASE:#x}
        rt_loop:
        """
    )
    if resync:
        b.op("lw r1, 0(r19)")
        b.op("addi r19, r19, 64")
    b.op("rdcyc r17")
    emit_invoke(b, fn_id, args, layout)
    for _ in range(overlap_ops):
        b.op("addi r1, r1, 1")
    emit_wait(b, layout)
    b.ops(
        """
        rdcyc r1
        sub r1, r1, r17
        sw r1, 0(r18)
        addi r18, r18, 4
        addi r16, r16, -1
        bne r16, r0, rt_loop
        halt
        """
    )
    b.label(PROBE_TASK)
    for _ in range(task_ops):
        b.op("addi r2, r2, 1")
    b.op("ret")
    emit_dispatcher(b, table, layout, spin_delay)
    emit_task_table(b, table)
    return assemble(b.source())


def run_roundtrip(
    sim: SimConfig,
    reps: int,
    **options,
) -> tuple[RunResult, ChannelProbe]:
    layout = ChannelLayout(sim.channel_base)
    program = build_roundtrip_program(reps, layout, spin_delay=sim.spin_delay, **options)
    cfg = CoreConfig.from_sim_config(sim, Scenario.DUAL)
    probe = ChannelProbe(layout)

    core = Core(cfg)
    core.load(program)
    core.add_store_observer(probe)
    core.start({0: program.entry_points["main"], 1: program.entry_points[DISPATCH_LABEL]})
    core.advance()
    return core.result(), probe


def measure_roundtrip(
    sim: SimConfig | None = None,
    reps: int = 1000,
    *,
    args: Sequence[Arg] = (),
    overlap_ops: int = 0,
    fn_id: int = 0,
    task_ops: int = 0,
) -> RoundTrip:
    """Cycles from just before invoke to just after wait, per repetition.

    One warm-up invocation is discarded. The loop runs twice, with and
    without the per-repetition cold miss.
    """
    sim = sim or SimConfig()
    options = {"args": args, "overlap_ops": overlap_ops, "fn_id": fn_id, "task_ops": task_ops}
    result, synced_checks = run_roundtrip(sim, reps, **options)
    free, free_checks = run_roundtrip(sim, reps, resync=False, **options)
    for outcome in (result, free):
        if not outcome.ok:
            raise ChannelError(f"round-trip run did not halt: {outcome.exit_kind}")
    atomic = sum(t.stats.atomic_ops for outcome in (result, free) for t in outcome.threads)
    return RoundTrip(
        _samples(result, reps),
        tuple(synced_checks.violations + free_checks.violations),
        atomic,
        free_running=_samples(free, reps),
    )


def _samples(result: RunResult, reps: int) -> tuple[int, ...]:
    return tuple(result.memory.read_word(RESULTS_BASE + 4 * i) for i in range(1, reps + 1))


__all__ = [
    "REFERENCE_CYCLES",
    "RoundTrip",
    "build_roundtrip_program",
    "measure_roundtrip",
    "run_roundtrip",
]
