"""Thread channel layout and a store-watching discipline probe."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import IntEnum

from ..logging import get_logger

CHANNEL_BYTES = 64
N_ARGS = 8
N_RETVALS = 2
ERROR_SENTINEL = 0xDEADBEEF


class ChannelError(Exception):
    """Channel misuse: bad layout, unknown task, or a protocol violation."""


class ChannelStatus(IntEnum):
    IDLE = 0
    REQUEST = 1
    BUSY = 2
    DONE = 3


# (from, to) -> thread allowed to make the transition
_TRANSITIONS = {
    (ChannelStatus.IDLE, ChannelStatus.REQUEST): 0,
    (ChannelStatus.REQUEST, ChannelStatus.BUSY): 1,
    (ChannelStatus.BUSY, ChannelStatus.DONE): 1,
    (ChannelStatus.DONE, ChannelStatus.IDLE): 0,
}


@dataclass(frozen=True)
class ChannelLayout:
    """Field offsets of the channel record inside its 64-byte line."""

    base: int

    STATUS = 0
    FN_ID = 4
    ARGS = 8
    RETVAL = 40

    def __post_init__(self) -> None:
        if self.base % CHANNEL_BYTES:
            raise ChannelError(f"channel base {self.base:#x} is not 64-byte aligned")

    @property
    def status_addr(self) -> int:
        return self.base + self.STATUS

    @property
    def fn_id_addr(self) -> int:
        return self.base + self.FN_ID

    def arg_offset(self, index: int) -> int:
        if not 0 <= index < N_ARGS:
            raise ChannelError(f"argument slot {index} outside 0..{N_ARGS - 1}")
        return self.ARGS + 4 * index

    def retval_offset(self, index: int) -> int:
        if not 0 <= index < N_RETVALS:
            raise ChannelError(f"return slot {index} outside 0..{N_RETVALS - 1}")
        return self.RETVAL + 4 * index

    def contains(self, addr: int) -> bool:
        return self.base <= addr < self.base + CHANNEL_BYTES

    def field_of(self, addr: int) -> str:
        offset = addr - self.base
        if offset < self.FN_ID:
            return "status"
        if offset < self.ARGS:
            return "fn_id"
        if offset < self.RETVAL:
            return "args"
        if offset < self.RETVAL + 4 * N_RETVALS:
            return "retval"
        return "pad"


@dataclass(frozen=True)
class TaskTable:
    """Task routine labels; fn_id ``i`` names ``labels[i - 1]``, 0 is the no-op."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise ChannelError("task labels must be unique")

    @classmethod
    def of(cls, labels: Sequence[str]) -> TaskTable:
        return cls(tuple(labels))

    def fn_id(self, label: str) -> int:
        try:
            return self.labels.index(label) + 1
        except ValueError:
            raise ChannelError(f"no task named {label!r}") from None

    def __len__(self) -> int:
        return len(self.labels)


@dataclass
class ChannelProbe:
    """Store observer that enforces the channel protocol.

    Thread 0 owns fn_id and args while the status is IDLE and is the only
    writer of REQUEST and IDLE; thread 1 owns retval while BUSY and writes
    BUSY and DONE. Anything else is recorded as a violation.
    """

    layout: ChannelLayout
    status: ChannelStatus = ChannelStatus.IDLE
    violations: list[str] = field(default_factory=list)
    # status value -> cycles at which it became visible to the other thread
    visible_at: dict[ChannelStatus, list[int]] = field(
        default_factory=lambda: {s: [] for s in ChannelStatus}
    )
    requests: int = 0

    def __call__(self, tid: int, addr: int, width: int, value: int, cycle: int) -> None:
        if not self.layout.contains(addr):
            return
        name = self.layout.field_of(addr)
        if name == "status":
            self._status_store(tid, value, cycle)
        elif name in ("fn_id", "args"):
            self._expect(tid == 0 and self.status is ChannelStatus.IDLE, tid, name, cycle)
        elif name == "retval":
            self._expect(tid == 1 and self.status is ChannelStatus.BUSY, tid, name, cycle)
        else:
            self._violation(f"cycle {cycle}: thread {tid} wrote channel padding at {addr:#x}")

    def _status_store(self, tid: int, value: int, cycle: int) -> None:
        try:
            new = ChannelStatus(value)
        except ValueError:
            self._violation(f"cycle {cycle}: thread {tid} wrote invalid status {value}")
            return
        writer = _TRANSITIONS.get((self.status, new))
        if writer is None:
            self._violation(
                f"cycle {cycle}: thread {tid} moved status {self.status.name} -> {new.name}"
            )
        elif writer != tid:
            self._violation(
                f"cycle {cycle}: thread {tid} made the {self.status.name} -> {new.name}"
                f" transition owned by thread {writer}"
            )
        if new is ChannelStatus.REQUEST:
            self.requests += 1
        self.status = new
        self.visible_at[new].append(cycle + 1)

    def _expect(self, ok: bool, tid: int, name: str, cycle: int) -> None:
        if not ok:
            self._violation(
                f"cycle {cycle}: thread {tid} wrote {name} while status is {self.status.name}"
            )

    def _violation(self, message: str) -> None:
        self.violations.append(message)
        get_logger().log_warning("channel_violation", message)
