"""Per-thread and whole-run statistics."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class StallCause(Enum):
    OWN_MISS = "own_miss"
    BLOCKED_BY_OTHER_MISS = "blocked_by_other_miss"
    ARBITRATION_LOST = "arbitration_lost"
    LOCK_WAIT = "lock_wait"
    FP_BUSY = "fp_busy"
    FETCH = "fetch"
    MISPREDICT = "mispredict"
    INT_DIV = "int_div"
    FP_LONG = "fp_long"
    ATOMIC = "atomic"


@dataclass
class ThreadStats:
    """Counters for one hardware thread.

    Every active cycle is either an issue cycle (one retired instruction) or
    a stall cycle with exactly one cause.
    """

    cycles_active: int = 0
    instructions_retired: int = 0
    icache_accesses: int = 0
    icache_hits: int = 0
    dcache_accesses: int = 0
    dcache_hits: int = 0
    ibuf_hits: int = 0
    stall_cycles: dict[StallCause, int] = field(
        default_factory=lambda: dict.fromkeys(StallCause, 0)
    )
    fp_ops: int = 0
    mispredicts: int = 0
    branches: int = 0
    atomic_ops: int = 0
    activations: int = 0

    @property
    def total_stalls(self) -> int:
        return sum(self.stall_cycles.values())

    @property
    def dcache_miss_rate(self) -> float:
        if not self.dcache_accesses:
            return 0.0
        return 1.0 - self.dcache_hits / self.dcache_accesses

    def check(self) -> list[str]:
        problems = []
        if self.cycles_active != self.instructions_retired + self.total_stalls:
            problems.append(
                f"cycles_active {self.cycles_active} != retired {self.instructions_retired}"
                f" + stalls {self.total_stalls}"
            )
        if self.icache_hits > self.icache_accesses or self.dcache_hits > self.dcache_accesses:
            problems.append("more hits than accesses")
        if any(v < 0 for v in self.stall_cycles.values()):
            problems.append("negative stall count")
        return problems

    def to_dict(self) -> dict[str, Any]:
        return {
            "cycles_active": self.cycles_active,
            "instructions_retired": self.instructions_retired,
            "icache": {"accesses": self.icache_accesses, "hits": self.icache_hits},
            "dcache": {"accesses": self.dcache_accesses, "hits": self.dcache_hits},
            "ibuf_hits": self.ibuf_hits,
            "stall_cycles": {cause.value: n for cause, n in self.stall_cycles.items()},
            "fp_ops": self.fp_ops,
            "mispredicts": self.mispredicts,
            "branches": self.branches,
            "atomic_ops": self.atomic_ops,
            "activations": self.activations,
        }


@dataclass
class SimStats:
    threads: list[ThreadStats]
    total_cycles: int = 0
    memory_grants: int = 0
    memory_responses: int = 0

    def check(self) -> list[str]:
        problems = [f"thread {tid}: {p}" for tid, t in enumerate(self.threads) for p in t.check()]
        if self.memory_grants != self.memory_responses:
            problems.append(f"grants {self.memory_grants} != responses {self.memory_responses}")
        return problems

    def to_dict(self) -> dict[str, Any]:
        return {
            "total_cycles": self.total_cycles,
            "memory": {"grants": self.memory_grants, "responses": self.memory_responses},
            "threads": [t.to_dict() for t in self.threads],
        }
