"""The memory unit shared by both hardware threads.

Two caches, one round-robin arbiter per cache, a whole-unit lock taken by
atomic instructions, write-through-allocate stores and a fixed miss penalty.
In the default unified blocking mode a miss in either cache keeps the whole
unit busy; in per-cache mode each cache has its own busy state.
"""

from __future__ import annotations

import struct
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

from ..config import CacheConfig
from ..isa import Program
from .cache import Cache
from .memory import BackingMemory, BusFault

IFETCH_BYTES = 8


class SimulatorBug(AssertionError):
    """An internal invariant of the simulator was broken."""


class AccessKind(Enum):
    IFETCH = "ifetch"
    LOAD = "load"
    STORE = "store"
    TAS = "tas"


@dataclass(frozen=True, slots=True)
class MemRequest:
    tid: int
    kind: AccessKind
    addr: int
    width: int
    data: int | None = None


@dataclass(frozen=True, slots=True)
class MemResponse:
    """Outcome of a granted access.

    ``done_at`` is the cycle the data is available: the grant cycle on a hit,
    later on a miss or an atomic. ``queued`` counts the cycles the access
    waited behind a miss granted earlier in the same cycle.
    """

    data: int | None
    hit: bool
    done_at: int
    cycles_waited: int
    queued: int = 0


class GrantStatus(Enum):
    GRANTED = "granted"
    BUSY = "busy"  # a miss is in flight
    LOCKED = "locked"  # the other thread holds the unit lock
    LOST = "lost"  # the arbiter picked the other thread


@dataclass(frozen=True, slots=True)
class Grant:
    status: GrantStatus
    until: int = 0

    @property
    def granted(self) -> bool:
        return self.status is GrantStatus.GRANTED


GRANTED = Grant(GrantStatus.GRANTED)
LOST = Grant(GrantStatus.LOST)


class Arbiter:
    """Round-robin between two threads for one cache."""

    def __init__(self) -> None:
        # 1 so that thread 0 wins the first contested cycle
        self.last_granted = 1
        self.grants = [0, 0]

    def grant(self, requests: tuple[bool, bool]) -> int | None:
        if requests[0] and requests[1]:
            winner = 1 - self.last_granted
        elif requests[0]:
            winner = 0
        elif requests[1]:
            winner = 1
        else:
            return None
        self.last_granted = winner
        self.grants[winner] += 1
        return winner


StoreObserver = Callable[[int, int, int, int, int], None]
"""Called as ``observer(tid, addr, width, value, cycle)`` after each store."""

LoadObserver = StoreObserver
"""Same signature, called after each granted data load."""


class MemoryUnit:
    def __init__(
        self,
        icache: CacheConfig,
        dcache: CacheConfig,
        memory_bytes: int = 16 * 1024 * 1024,
        blocking: str = "unified",
    ):
        if blocking not in ("unified", "per_cache"):
            raise ValueError(f"unknown blocking mode {blocking!r}")
        self.icache = Cache(icache, "icache")
        self.dcache = Cache(dcache, "dcache")
        self.backing = BackingMemory(memory_bytes)
        self.blocking = blocking
        self.arbiters = {"icache": Arbiter(), "dcache": Arbiter()}
        self.busy_until: dict[str, int] = {"icache": 0, "dcache": 0}
        self.lock_holder: int | None = None
        self.lock_release_at = 0
        self.grants = 0
        self.responses = 0
        self._observers: list[StoreObserver] = []
        self._load_observers: list[LoadObserver] = []

    # --- structure -------------------------------------------------------

    def cache_for(self, kind: AccessKind) -> Cache:
        return self.icache if kind is AccessKind.IFETCH else self.dcache

    def _port(self, kind: AccessKind) -> str:
        if self.blocking == "unified":
            return "icache"
        return "icache" if kind is AccessKind.IFETCH else "dcache"

    def port_busy_until(self, kind: AccessKind) -> int:
        return self.busy_until[self._port(kind)]

    def add_store_observer(self, observer: StoreObserver) -> None:
        self._observers.append(observer)

    def add_load_observer(self, observer: LoadObserver) -> None:
        self._load_observers.append(observer)

    # --- lock ------------------------------------------------------------

    def lock(self, tid: int) -> bool:
        """Take the unit lock; False when the other thread holds it."""
        if self.lock_holder is not None and self.lock_holder != tid:
            return False
        self.lock_holder = tid
        return True

    def unlock(self, tid: int) -> None:
        if self.lock_holder != tid:
            raise SimulatorBug(f"thread {tid} released a lock held by {self.lock_holder}")
        self.lock_holder = None

    def _release_due_lock(self, now: int) -> None:
        if self.lock_holder is not None and self.lock_release_at <= now:
            self.unlock(self.lock_holder)

    # --- timing ----------------------------------------------------------

    def arbitrate(self, requests: dict[int, MemRequest], now: int) -> dict[int, Grant]:
        """Decide which of this cycle's requests are accepted.

        A request is refused when the other thread holds the lock or when
        its port has a miss in flight. Surviving requests for the same cache
        go through that cache's arbiter.
        """
        self._release_due_lock(now)
        if len(requests) == 1 and self.lock_holder is None:
            ((tid, req),) = requests.items()
            busy = self.busy_until[self._port(req.kind)]
            if busy > now:
                return {tid: Grant(GrantStatus.BUSY, busy)}
            self.arbiters[self.cache_for(req.kind).name].grant((tid == 0, tid == 1))
            return {tid: GRANTED}
        result: dict[int, Grant] = {}
        contenders: dict[str, list[int]] = {"icache": [], "dcache": []}
        for tid, req in requests.items():
            if self.lock_holder is not None and self.lock_holder != tid:
                result[tid] = Grant(GrantStatus.LOCKED, self.lock_release_at)
                continue
            busy = self.busy_until[self._port(req.kind)]
            if busy > now:
                result[tid] = Grant(GrantStatus.BUSY, busy)
                continue
            contenders[self.cache_for(req.kind).name].append(tid)
        for name, tids in contenders.items():
            if not tids:
                continue
            winner = self.arbiters[name].grant((0 in tids, 1 in tids))
            for tid in tids:
                result[tid] = GRANTED if tid == winner else LOST
        return result

    def access(self, req: MemRequest, now: int) -> MemResponse:
        """Perform a granted access. Raises BusFault for bad addresses."""
        self.backing.check(req.addr, req.width)
        port = self._port(req.kind)
        self.grants += 1
        cache = self.cache_for(req.kind)
        hit = cache.probe(req.addr)
        queued = 0
        done_at = now
        if not hit:
            start = max(now, self.busy_until[port])
            queued = start - now
            penalty = cache.config.miss_penalty_cycles
            done_at = start + penalty
            self.busy_until[port] = done_at
            base = cache.line_base(req.addr)
            cache.fill(req.addr, self.backing.read_bytes(base, cache.line_bytes))

        data: int | None = None
        if req.kind in (AccessKind.IFETCH, AccessKind.LOAD):
            data = cache.read(req.addr, req.width)
            if req.kind is AccessKind.LOAD:
                for observer in self._load_observers:
                    observer(req.tid, req.addr, req.width, data, now)
        elif req.kind is AccessKind.STORE:
            self._store(req.tid, req.addr, req.width, req.data or 0, now)
        else:
            # test-and-set: read, then write 1 under the lock one cycle later
            data = cache.read(req.addr, 1)
            if not self.lock(req.tid):
                raise SimulatorBug(f"thread {req.tid} granted TAS while unit is locked")
            if data == 0:
                self._store(req.tid, req.addr, 1, 1, now)
            done_at += 1
            self.lock_release_at = done_at + 1
        self.responses += 1
        return MemResponse(data, hit, done_at, done_at - now, queued)

    def _store(self, tid: int, addr: int, width: int, value: int, now: int) -> None:
        self.dcache.write(addr, width, value)
        self.icache.write(addr, width, value)
        self.backing.write(addr, width, value)
        for observer in self._observers:
            observer(tid, addr, width, value, now)

    # --- host-side access ------------------------------------------------

    def load_image(self, program: Program, cold: bool = True) -> None:
        """Place a program's words at its base address, bypassing timing."""
        self.write_bytes(program.base_address, program.to_bytes())
        if cold:
            self.icache.invalidate()
            self.dcache.invalidate()

    def write_bytes(self, addr: int, data: bytes) -> None:
        self.backing.write_bytes(addr, data)
        self.icache.write_bytes(addr, data)
        self.dcache.write_bytes(addr, data)

    def read_bytes(self, addr: int, length: int) -> bytes:
        return self.backing.read_bytes(addr, length)

    def read_word(self, addr: int) -> int:
        return self.backing.read_word(addr)

    def write_word(self, addr: int, value: int) -> None:
        self.write_bytes(addr, (value & 0xFFFFFFFF).to_bytes(4, "little"))

    def read_double(self, addr: int) -> float:
        return self.backing.read_double(addr)

    def write_double(self, addr: int, value: float) -> None:
        self.write_bytes(addr, struct.pack("<d", value))

    peek = read_word
    poke = write_word

    # --- invariants ------------------------------------------------------

    def check_coherence(self) -> list[int]:
        """Base addresses of resident lines that differ from backing memory."""
        stale = []
        for cache in (self.icache, self.dcache):
            for base, data in cache.resident_lines():
                if self.backing.read_bytes(base, len(data)) != data:
                    stale.append(base)
        return sorted(stale)

    def in_flight(self, now: int) -> bool:
        return any(until > now for until in self.busy_until.values())


__all__ = [
    "IFETCH_BYTES",
    "AccessKind",
    "Arbiter",
    "BusFault",
    "Grant",
    "GrantStatus",
    "LoadObserver",
    "MemRequest",
    "MemResponse",
    "MemoryUnit",
    "SimulatorBug",
]
