"""The dual-threaded core: two pipelines around one memory unit."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import Enum
from typing import TextIO

from ..config import CacheConfig, SimConfig
from ..isa import Program
from ..logging import get_logger
from .memory import BusFault
from .memunit import MemoryUnit, StoreObserver
from .pipeline import HardwareThread, ThreadFault, Timing
from .stats import SimStats
from .trace import TraceWriter


class ThreadControlError(Exception):
    """A thread cannot be activated or deactivated as requested."""


class ThreadMode(Enum):
    INACTIVE = "inactive"
    SPINNING = "spinning"
    ACTIVE = "active"


class Scenario(Enum):
    """The four measurement configurations."""

    SINGLE = "single"
    INACTIVE = "inactive"
    SPINNING = "spinning"
    DUAL = "dual"

    @property
    def n_threads(self) -> int:
        return 1 if self is Scenario.SINGLE else 2

    @property
    def thread1_mode(self) -> ThreadMode:
        return {
            Scenario.SINGLE: ThreadMode.INACTIVE,
            Scenario.INACTIVE: ThreadMode.INACTIVE,
            Scenario.SPINNING: ThreadMode.SPINNING,
            Scenario.DUAL: ThreadMode.ACTIVE,
        }[self]

    @property
    def label(self) -> str:
        return {
            Scenario.SINGLE: "single-threaded",
            Scenario.INACTIVE: "0 active, 1 inactive",
            Scenario.SPINNING: "0 active, 1 spinning",
            Scenario.DUAL: "0 active, 1 active",
        }[self]


@dataclass(frozen=True)
class CoreConfig:
    n_threads: int = 2
    thread1_mode: ThreadMode = ThreadMode.INACTIVE
    icache: CacheConfig = field(default_factory=CacheConfig)
    dcache: CacheConfig = field(default_factory=CacheConfig)
    mispredict_penalty: int = 4
    int_div_cycles: int = 24
    max_cycles: int = 400_000_000
    trace: bool = False
    blocking: str = "unified"
    memory_bytes: int = 16 * 1024 * 1024
    # thread 1 serves requests and never has to halt for the run to end
    thread1_service: bool = False

    def __post_init__(self) -> None:
        if self.n_threads not in (1, 2):
            raise ValueError(f"n_threads must be 1 or 2, got {self.n_threads}")

    @classmethod
    def from_sim_config(
        cls, sim: SimConfig, scenario: Scenario = Scenario.SINGLE, *, service: bool | None = None
    ) -> CoreConfig:
        mode = scenario.thread1_mode
        return cls(
            n_threads=scenario.n_threads,
            thread1_mode=mode,
            icache=sim.icache,
            dcache=sim.dcache,
            mispredict_penalty=sim.mispredict_penalty,
            int_div_cycles=sim.int_div_cycles,
            max_cycles=sim.max_cycles,
            trace=sim.trace,
            blocking=sim.blocking,
            memory_bytes=sim.memory_bytes,
            thread1_service=(mode is not ThreadMode.INACTIVE) if service is None else service,
        )

    @property
    def timing(self) -> Timing:
        return Timing(
            mispredict_penalty=self.mispredict_penalty,
            int_div_cycles=self.int_div_cycles,
        )


@dataclass(frozen=True)
class Halted:
    kind = "halted"


@dataclass(frozen=True)
class MaxCycles:
    limit: int
    kind = "max_cycles"


@dataclass(frozen=True)
class Fault:
    tid: int
    pc: int
    kind: str
    detail: str = ""

    def describe(self) -> str:
        text = f"thread {self.tid} faulted at pc {self.pc:#010x}: {self.kind}"
        return f"{text} ({self.detail})" if self.detail else text


RunExit = Halted | MaxCycles | Fault


@dataclass
class RunResult:
    stats: SimStats
    exit: RunExit
    memory: MemoryUnit
    threads: list[HardwareThread]
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return isinstance(self.exit, Halted)

    @property
    def total_cycles(self) -> int:
        return self.stats.total_cycles

    @property
    def exit_kind(self) -> str:
        return "fault" if isinstance(self.exit, Fault) else self.exit.kind

    def to_dict(self) -> dict:
        data = {"exit": self.exit_kind, **self.stats.to_dict()}
        if isinstance(self.exit, Fault):
            data["fault"] = {"tid": self.exit.tid, "pc": self.exit.pc, "kind": self.exit.kind}
        if self.warnings:
            data["warnings"] = list(self.warnings)
        return data


class Core:
    """Owns the threads and the memory unit and drives the global clock.

    Within a cycle, requests from every ready thread are collected first,
    arbitrated together, and then the threads step in thread order.
    """

    def __init__(self, cfg: CoreConfig, trace: TextIO | None = None):
        self.cfg = cfg
        self.mem = MemoryUnit(cfg.icache, cfg.dcache, cfg.memory_bytes, cfg.blocking)
        tracer = TraceWriter(trace) if trace is not None else None
        timing = cfg.timing
        self.threads = [HardwareThread(tid, self.mem, timing, tracer) for tid in range(cfg.n_threads)]
        if cfg.n_threads == 2:
            self.threads[1].service = cfg.thread1_service
        self.now = 0
        self.exit: RunExit | None = None
        self.total_cycles = 0
        self.warnings: list[str] = []
        self._smc_seen: set[int] = set()
        self.mem.add_store_observer(self._check_self_modifying)

    # --- setup -------------------------------------------------------------

    def load(self, program: Program) -> None:
        self.mem.load_image(program)

    def add_store_observer(self, observer: StoreObserver) -> None:
        self.mem.add_store_observer(observer)

    def start(self, entries: Mapping[int, int]) -> None:
        """Activate the threads named in ``entries`` at their entry pcs."""
        for tid, pc in sorted(entries.items()):
            if tid == 1 and self.cfg.thread1_mode is ThreadMode.INACTIVE:
                continue
            self.set_thread_active(tid, True, pc=pc)

    def set_thread_active(self, tid: int, active: bool, pc: int | None = None) -> None:
        if not 0 <= tid < len(self.threads):
            raise ThreadControlError(f"no thread {tid} in a {len(self.threads)}-thread core")
        thread = self.threads[tid]
        if active:
            if not thread.active or pc is not None:
                thread.activate(self.now, pc)
            return
        if not thread.active:
            return
        others = [t for t in self.threads if t is not thread and t.active and not t.halted]
        if not others and not thread.halted:
            raise ThreadControlError(f"thread {tid} is the only active thread")
        thread.close(self.now)
        thread.active = False

    # --- clock ---------------------------------------------------------------

    def _finished(self) -> bool:
        deciding = [t for t in self.threads if t.active and not t.service]
        return all(t.halted for t in deciding)

    def advance(self, until: int | None = None) -> RunExit | None:
        """Run until an exit condition, or until cycle ``until`` when given."""
        limit = self.cfg.max_cycles
        while self.exit is None:
            if self._finished():
                halts = [t.halt_cycle for t in self.threads if t.halt_cycle is not None]
                self._finish(Halted(), max(halts, default=self.now - 1) + 1)
                break
            runnable = [t for t in self.threads if t.active and not t.halted]
            now = max(self.now, min(t.ready_at for t in runnable))
            if until is not None and now >= until:
                self.now = until
                return None
            if now >= limit:
                self._finish(MaxCycles(limit), limit)
                break
            self._cycle(now, runnable)
            self.now = now + 1
        return self.exit

    def _cycle(self, now: int, runnable: list[HardwareThread]) -> None:
        proposals = [(t, t.propose(now)) for t in runnable if t.ready_at <= now]
        requests = {t.tid: p.request for t, p in proposals if p.request is not None}
        grants = self.mem.arbitrate(requests, now) if requests else {}
        for thread, proposal in proposals:
            try:
                thread.step(proposal, grants.get(thread.tid), now)
            except (ThreadFault, BusFault) as exc:
                kind = exc.kind if isinstance(exc, ThreadFault) else "bus_error"
                self._finish(Fault(thread.tid, thread.pc, kind, str(exc)), now + 1)
                get_logger().log_fault(thread.tid, thread.pc, kind, now)
                return

    def _finish(self, exit: RunExit, end: int) -> None:
        self.exit = exit
        self.total_cycles = end
        self.now = end
        for thread in self.threads:
            thread.close(end)

    def _check_self_modifying(self, tid: int, addr: int, width: int, value: int, cycle: int) -> None:
        for word in range(addr & ~3, addr + width, 4):
            if word in self._smc_seen:
                continue
            for thread in self.threads:
                if thread.ibuf.contains(word):
                    self._smc_seen.add(word)
                    message = (
                        f"cycle {cycle}: thread {tid} stored to {word:#010x},"
                        f" buffered as an instruction by thread {thread.tid}"
                    )
                    self.warnings.append(message)
                    get_logger().log_warning("smc_warning", message, cycle)
                    break

    # --- results -------------------------------------------------------------

    def result(self) -> RunResult:
        if self.exit is None:
            raise ThreadControlError("the run has not finished")
        stats = SimStats(
            threads=[t.stats for t in self.threads],
            total_cycles=self.total_cycles,
            memory_grants=self.mem.grants,
            memory_responses=self.mem.responses,
        )
        return RunResult(stats, self.exit, self.mem, self.threads, list(self.warnings))


def run(
    images: Iterable[Program],
    cfg: CoreConfig,
    entries: Mapping[int, int],
    data: Iterable[tuple[int, bytes]] = (),
    trace: TextIO | None = None,
) -> RunResult:
    """Load images and data segments, start the threads and run to completion."""
    core = Core(cfg, trace=trace)
    for program in images:
        core.load(program)
    for addr, blob in data:
        core.mem.write_bytes(addr, blob)
    core.start(entries)
    core.advance()
    return core.result()


def speedup(baseline: RunResult, candidate: RunResult) -> float:
    """total_cycles(baseline) / total_cycles(candidate)."""
    if candidate.total_cycles <= 0:
        raise ValueError("speedup needs a run with a nonzero cycle count")
    return baseline.total_cycles / candidate.total_cycles
