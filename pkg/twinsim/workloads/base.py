"""Shared machinery for benchmark workloads.

Every workload is one program image with the entries ``main_single``,
``main_dual`` and ``sk_dispatch`` plus its task routines. Scenarios only
choose entries and thread modes, so the text layout is the same in all four.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any, TextIO

import numpy as np

from ..asm import AsmBuilder, assemble
from ..config import SimConfig
from ..isa import Program
from ..sidekick import (
    ARG_REGS,
    DISPATCH_LABEL,
    ChannelLayout,
    ChannelProbe,
    TaskTable,
    emit_dispatcher,
    emit_invoke,
    emit_task_table,
    emit_wait,
)
from ..sidekick.codegen import Arg
from ..sim import Core, CoreConfig, MemoryUnit, RunResult, Scenario

TEXT_BASE = 0x1000
DATA_BASE = 0x0010_0000
ENTRY_SINGLE = "main_single"
ENTRY_DUAL = "main_dual"


class WorkloadError(Exception):
    """A workload cannot be built with the requested parameters."""


class OracleFailure(Exception):
    """Final memory disagrees with the host reference."""

    def __init__(self, workload: str, problems: list[str]):
        self.workload = workload
        self.problems = problems
        shown = "; ".join(problems[:5])
        more = f" (+{len(problems) - 5} more)" if len(problems) > 5 else ""
        super().__init__(f"{workload}: {shown}{more}")


@dataclass(frozen=True)
class Call:
    """A task invocation: label plus argument registers/values for r4..r11."""

    task: str
    args: tuple[Arg, ...] = ()


@dataclass(frozen=True)
class Region:
    addr: int
    nbytes: int


class DataImage:
    """Bump allocator over the data area plus its initial contents."""

    def __init__(self, base: int = DATA_BASE):
        self.base = base
        self.cursor = base
        self.regions: dict[str, Region] = {}
        self.segments: list[tuple[int, bytes]] = []

    def alloc(self, name: str, nbytes: int, align: int = 64) -> int:
        if name in self.regions:
            raise WorkloadError(f"data region {name!r} allocated twice")
        addr = -(-self.cursor // align) * align
        nbytes = -(-nbytes // 4) * 4
        self.regions[name] = Region(addr, nbytes)
        self.cursor = addr + nbytes
        return addr

    def place(self, name: str, data: bytes | np.ndarray, align: int = 64) -> int:
        blob = data.tobytes() if isinstance(data, np.ndarray) else bytes(data)
        if len(blob) % 4:
            blob += bytes(4 - len(blob) % 4)
        addr = self.alloc(name, len(blob), align)
        self.segments.append((addr, blob))
        return addr

    def __getitem__(self, name: str) -> int:
        return self.regions[name].addr

    @property
    def end(self) -> int:
        return self.cursor


def read_doubles(mem: MemoryUnit, addr: int, count: int) -> np.ndarray:
    return np.frombuffer(mem.read_bytes(addr, 8 * count), dtype="<f8").copy()


def read_words(mem: MemoryUnit, addr: int, count: int, signed: bool = True) -> np.ndarray:
    return np.frombuffer(mem.read_bytes(addr, 4 * count), dtype="<i4" if signed else "<u4").copy()


class KernelProgram:
    """Collects task routines and emits the full workload image."""

    def __init__(self, name: str, sim: SimConfig):
        self.name = name
        self.sim = sim
        self.layout = ChannelLayout(sim.channel_base)
        self._tasks: list[str] = []
        self._routines: list[AsmBuilder] = []
        self._ids = 0

    def task(self, label: str) -> AsmBuilder:
        """Start a routine that thread 1 can be asked to run."""
        self._tasks.append(label)
        return self.routine(label)

    def routine(self, label: str) -> AsmBuilder:
        """Start a helper routine reachable only by ``call``."""
        b = AsmBuilder()
        b.label(label)
        self._routines.append(b)
        return b

    @property
    def table(self) -> TaskTable:
        return TaskTable.of(self._tasks)

    def unique(self, stem: str) -> str:
        self._ids += 1
        return f"{stem}_{self._ids}"

    def call(self, b: AsmBuilder, call: Call) -> None:
        for reg, arg in zip(ARG_REGS, call.args, strict=False):
            if isinstance(arg, str) and arg.lower().startswith("r") and arg[1:].isdigit():
                if arg.lower() != reg:
                    b.op(f"mv {reg}, {arg}")
            else:
                b.op(f"li {reg}, {arg}")
        b.op(f"call {call.task}")

    def parallel(self, b: AsmBuilder, local: Call, remote: Call, dual: bool) -> None:
        """Run ``remote`` on thread 1 while thread 0 runs ``local`` (dual),
        or both on thread 0 one after the other."""
        if not dual:
            self.call(b, local)
            self.call(b, remote)
            return
        emit_invoke(b, self.table.fn_id(remote.task), remote.args, self.layout)
        self.call(b, local)
        emit_wait(b, self.layout)

    def build(self, emit_main: Callable[[AsmBuilder, bool], None]) -> tuple[Program, str]:
        b = AsmBuilder()
        b.comment(f"{self.name}: generated workload image")
        b.directive(".org", f"{TEXT_BASE:#x}")
        for entry in (ENTRY_SINGLE, ENTRY_DUAL, DISPATCH_LABEL):
            b.directive(".global", entry)
        for entry, dual in ((ENTRY_SINGLE, False), (ENTRY_DUAL, True)):
            b.label(entry)
            emit_main(b, dual)
            b.op("halt")
        for routine in self._routines:
            b.extend(routine)
        emit_dispatcher(b, self.table, self.layout, self.sim.spin_delay)
        emit_task_table(b, self.table)
        source = b.source()
        program = assemble(source)
        if program.end_address > self.layout.base:
            raise WorkloadError(f"{self.name}: text overlaps the channel at {self.layout.base:#x}")
        return program, source


def emit_counted_loop(b: AsmBuilder, counter: str, count: int, body: Callable[[], None], stem: str) -> None:
    """Run ``body`` ``count`` times using a main-owned counter register."""
    if count <= 1:
        body()
        return
    top = b.unique(stem)
    b.op(f"li {counter}, {count}")
    b.label(top)
    body()
    b.op(f"addi {counter}, {counter}, -1")
    b.op(f"bne {counter}, r0, {top}")


@dataclass
class Workload:
    name: str
    sizes: dict[str, int]
    partitioning: str
    program: Program
    source: str
    data: DataImage
    channel_base: int
    oracle_id: str
    check: Callable[[MemoryUnit], list[str]]
    notes: dict[str, Any] = field(default_factory=dict)
    report: Callable[[MemoryUnit], dict[str, Any]] | None = None
    uses_atomics: bool = False

    def entries(self, scenario: Scenario) -> dict[int, int]:
        eps = self.program.entry_points
        if scenario is Scenario.DUAL:
            return {0: eps[ENTRY_DUAL], 1: eps[DISPATCH_LABEL]}
        if scenario is Scenario.SPINNING:
            return {0: eps[ENTRY_SINGLE], 1: eps[DISPATCH_LABEL]}
        return {0: eps[ENTRY_SINGLE]}

    def verify(self, result: RunResult) -> None:
        problems = [] if result.ok else [f"run ended with {result.exit_kind}"]
        if not problems:
            problems = self.check(result.memory)
        if problems:
            raise OracleFailure(self.name, problems)

    def manifest(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "sizes": dict(self.sizes),
            "partitioning": self.partitioning,
            "entries": {k: v for k, v in sorted(self.program.entry_points.items())},
            "channel_base": self.channel_base,
            "oracle": self.oracle_id,
            "text": {"base": self.program.base_address, "words": len(self.program.words)},
            "data": [{"addr": addr, "bytes": len(blob)} for addr, blob in self.data.segments],
            "regions": {k: [r.addr, r.nbytes] for k, r in sorted(self.data.regions.items())},
            "notes": self.notes,
        }


def run_workload(
    workload: Workload,
    scenario: Scenario,
    sim: SimConfig | None = None,
    trace: TextIO | None = None,
    probe: ChannelProbe | None = None,
) -> RunResult:
    """Load a workload and run it in one scenario."""
    sim = sim or SimConfig()
    core = Core(CoreConfig.from_sim_config(sim, scenario), trace=trace)
    core.load(workload.program)
    for addr, blob in workload.data.segments:
        core.mem.write_bytes(addr, blob)
    if probe is not None:
        core.add_store_observer(probe)
    core.start(workload.entries(scenario))
    core.advance()
    return core.result()


def compare_exact(name: str, got: np.ndarray, want: np.ndarray, limit: int = 5) -> list[str]:
    """Element-wise bit equality (NaN-aware for floats)."""
    if got.shape != want.shape:
        return [f"{name}: shape {got.shape} != {want.shape}"]
    if got.dtype.kind == "f":
        same = (got == want) | (np.isnan(got) & np.isnan(want))
    else:
        same = got == want
    bad = np.flatnonzero(~same)
    return [f"{name}[{i}] = {got.flat[i]!r}, expected {want.flat[i]!r}" for i in bad[:limit]] + (
        [f"{name}: {len(bad)} mismatches"] if len(bad) > limit else []
    )


def seq_sum(values: Sequence[float]) -> float:
    """Left-to-right float sum, matching a simple accumulate loop."""
    total = 0.0
    for v in values:
        total += float(v)
    return total
