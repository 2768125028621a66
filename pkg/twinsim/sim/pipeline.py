"""One hardware thread: paired fetch, prediction, in-order single issue.

Each simulated cycle a ready thread first *proposes* what it wants from the
memory unit (an instruction-pair fetch, a data access, or nothing) and, after
arbitration, *steps*: it performs the granted access, executes, and sets
``ready_at`` to the next cycle it can act. Every cycle between issue and
``ready_at`` is booked to exactly one stall cause.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from ..isa import MEMORY_CLASSES, N_FREGS, N_IREGS, Format, Instruction, OpClass, Opcode, decode
from .ibuf import InstrBuffer
from .memunit import IFETCH_BYTES, AccessKind, Grant, GrantStatus, MemoryUnit, MemRequest, MemResponse
from .predictor import LINK_REG, BranchPredictor
from .stats import StallCause, ThreadStats
from .trace import TraceWriter

MASK32 = 0xFFFFFFFF
INT32_MIN, INT32_MAX = -(1 << 31), (1 << 31) - 1
_DOUBLE = struct.Struct("<d")
_QWORD = struct.Struct("<Q")
_SINGLE = struct.Struct("<f")


class ThreadFault(Exception):
    """The running program did something the machine cannot execute."""

    def __init__(self, kind: str, detail: str = ""):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}" if detail else kind)


@dataclass(frozen=True)
class Timing:
    mispredict_penalty: int = 4
    int_div_cycles: int = 24
    fp_short_latency: int = 2
    fp_long_double: int = 24
    fp_long_single: int = 16


# --- value helpers ---------------------------------------------------------


def signed32(value: int) -> int:
    return value - (1 << 32) if value & 0x80000000 else value


def to_single(value: float) -> float:
    """Round a double to the nearest single-precision value."""
    try:
        return _SINGLE.unpack(_SINGLE.pack(value))[0]
    except OverflowError:
        return math.copysign(math.inf, value)


def bits_to_double(bits: int) -> float:
    return _DOUBLE.unpack(_QWORD.pack(bits & 0xFFFFFFFFFFFFFFFF))[0]


def double_to_bits(value: float) -> int:
    return _QWORD.unpack(_DOUBLE.pack(value))[0]


def fp_div(a: float, b: float) -> float:
    if b == 0.0:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)
    return a / b


def fp_sqrt(a: float) -> float:
    if math.isnan(a) or a < 0.0:
        return math.nan
    return math.sqrt(a)


def fp_to_int(value: float) -> int:
    """Truncate toward zero, saturating; NaN converts to 0."""
    if math.isnan(value):
        return 0
    if value >= INT32_MAX:
        return INT32_MAX & MASK32
    if value <= INT32_MIN:
        return INT32_MIN & MASK32
    return int(value) & MASK32


def int_div(a: int, b: int) -> int:
    if b == 0:
        return MASK32
    sa, sb = signed32(a), signed32(b)
    q = abs(sa) // abs(sb)
    return (-q if (sa < 0) != (sb < 0) else q) & MASK32


def int_rem(a: int, b: int) -> int:
    if b == 0:
        return a
    sa, sb = signed32(a), signed32(b)
    return (sa - signed32(int_div(a, b)) * sb) & MASK32


_RRR = {
    Opcode.ADD: lambda a, b: (a + b) & MASK32,
    Opcode.SUB: lambda a, b: (a - b) & MASK32,
    Opcode.AND: lambda a, b: a & b,
    Opcode.OR: lambda a, b: a | b,
    Opcode.XOR: lambda a, b: a ^ b,
    Opcode.SLL: lambda a, b: (a << (b & 31)) & MASK32,
    Opcode.SRL: lambda a, b: a >> (b & 31),
    Opcode.SRA: lambda a, b: (signed32(a) >> (b & 31)) & MASK32,
    Opcode.SLT: lambda a, b: int(signed32(a) < signed32(b)),
    Opcode.MUL: lambda a, b: (a * b) & MASK32,
    Opcode.DIV: int_div,
    Opcode.REM: int_rem,
}

_RRI = {
    Opcode.ADDI: lambda a, imm: (a + imm) & MASK32,
    Opcode.ANDI: lambda a, imm: a & (imm & 0xFFFF),
    Opcode.ORI: lambda a, imm: a | (imm & 0xFFFF),
    Opcode.XORI: lambda a, imm: a ^ (imm & 0xFFFF),
    Opcode.SLTI: lambda a, imm: int(signed32(a) < imm),
    Opcode.SLLI: lambda a, imm: (a << (imm & 31)) & MASK32,
    Opcode.SRLI: lambda a, imm: a >> (imm & 31),
    Opcode.SRAI: lambda a, imm: (signed32(a) >> (imm & 31)) & MASK32,
}

_BRANCH = {
    Opcode.BEQ: lambda a, b: a == b,
    Opcode.BNE: lambda a, b: a != b,
    Opcode.BLT: lambda a, b: signed32(a) < signed32(b),
    Opcode.BGE: lambda a, b: signed32(a) >= signed32(b),
}

_FFF = {
    Opcode.FADD: lambda a, b: a + b,
    Opcode.FSUB: lambda a, b: a - b,
    Opcode.FMUL: lambda a, b: a * b,
    Opcode.FDIV: fp_div,
    Opcode.FDIVS: lambda a, b: to_single(fp_div(a, b)),
}

_FF = {
    Opcode.FCVT: to_single,
    Opcode.FSQRT: fp_sqrt,
    Opcode.FSQRTS: lambda a: to_single(fp_sqrt(a)),
}

_ACCESS = {
    Opcode.LW: AccessKind.LOAD,
    Opcode.LB: AccessKind.LOAD,
    Opcode.FLD: AccessKind.LOAD,
    Opcode.SW: AccessKind.STORE,
    Opcode.SB: AccessKind.STORE,
    Opcode.FST: AccessKind.STORE,
    Opcode.TAS: AccessKind.TAS,
}

_INT_SOURCES = {
    Format.RRR: ("rs1", "rs2"),
    Format.RRI: ("rs1",),
    Format.STORE: ("rs1", "rs2"),
    Format.BRANCH: ("rs1", "rs2"),
    Format.MEM: ("rs1",),
    Format.FR: ("rs1",),
    Format.FLOAD: ("rs1",),
    Format.FSTORE: ("rs1",),
}

_FP_SOURCES = {
    Format.FFF: ("fs1", "fs2"),
    Format.FF: ("fs1",),
    Format.RFF: ("fs1", "fs2"),
    Format.RF: ("fs1",),
    Format.FSTORE: ("fs2",),
}


@lru_cache(maxsize=1 << 14)
def source_registers(instr: Instruction) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(integer sources, FP sources) read by an instruction."""
    info = instr.info
    if info is None:
        return (), ()
    ints = tuple(getattr(instr, f) for f in _INT_SOURCES.get(info.fmt, ()))
    fps = tuple(getattr(instr, f) for f in _FP_SOURCES.get(info.fmt, ()))
    return ints, fps


@lru_cache(maxsize=1 << 16)
def decoded(word: int) -> tuple[Instruction, tuple[int, ...], tuple[int, ...], bool]:
    """Decoded instruction, its source registers and whether it uses the data port."""
    instr = decode(word)
    ints, fps = source_registers(instr)
    return instr, ints, fps, instr.op_class in MEMORY_CLASSES


# --- proposals ---------------------------------------------------------------


class Plan(Enum):
    FETCH = "fetch"
    WAIT = "wait"
    MEM = "mem"
    EXEC = "exec"


class Proposal:
    __slots__ = ("plan", "instr", "request", "wait_until")

    def __init__(
        self,
        plan: Plan,
        instr: Instruction | None = None,
        request: MemRequest | None = None,
        wait_until: int = 0,
    ):
        self.plan = plan
        self.instr = instr
        self.request = request
        self.wait_until = wait_until


_REFUSAL_CAUSE = {
    GrantStatus.BUSY: StallCause.BLOCKED_BY_OTHER_MISS,
    GrantStatus.LOCKED: StallCause.LOCK_WAIT,
    GrantStatus.LOST: StallCause.ARBITRATION_LOST,
}


class HardwareThread:
    """Architectural and timing state of one hardware thread."""

    def __init__(
        self,
        tid: int,
        mem: MemoryUnit,
        timing: Timing | None = None,
        trace: TraceWriter | None = None,
    ):
        self.tid = tid
        self.mem = mem
        self.timing = timing or Timing()
        self.trace = trace
        self.pc = 0
        self.iregs = [0] * N_IREGS
        self.fregs = [0.0] * N_FREGS
        self.active = False
        self.halted = False
        self.service = False
        self.halt_cycle: int | None = None
        self.ready_at = 0
        self.active_since = 0
        self.predictor = BranchPredictor()
        self.ibuf = InstrBuffer()
        self.int_ready = [0] * N_IREGS
        self.fp_ready = [0] * N_FREGS
        self.stats = ThreadStats()
        self._tail: list[tuple[StallCause, int]] = []
        self._fetched_pc: int | None = None

    # --- lifecycle ---------------------------------------------------------

    def activate(self, now: int, pc: int | None = None) -> None:
        if pc is not None:
            self.pc = pc
            self.halted = False
            self.halt_cycle = None
        self.active = True
        self.ready_at = now
        self.active_since = now
        self._tail = []
        self.stats.activations += 1

    def close(self, end: int) -> None:
        """Stop counting at cycle ``end``; stalls booked past it are taken back."""
        if not self.active or self.halted:
            return
        overshoot = self.ready_at - end
        while overshoot > 0 and self._tail:
            cause, cycles = self._tail.pop()
            taken = min(cycles, overshoot)
            self.stats.stall_cycles[cause] -= taken
            overshoot -= taken
            if taken < cycles:
                self._tail.append((cause, cycles - taken))
        self.ready_at = min(self.ready_at, end)
        self.stats.cycles_active += max(0, end - self.active_since)
        self.active_since = end

    def reg(self, index: int) -> int:
        return self.iregs[index]

    def set_reg(self, index: int, value: int) -> None:
        if index:
            self.iregs[index] = value & MASK32

    # --- cycle protocol ----------------------------------------------------

    def propose(self, now: int) -> Proposal:
        word = self.ibuf.lookup(self.pc)
        if word is None:
            return Proposal(
                Plan.FETCH,
                request=MemRequest(self.tid, AccessKind.IFETCH, self.pc & ~(IFETCH_BYTES - 1), 8),
            )
        return self._plan(word, now)

    def _plan(self, word: int, now: int) -> Proposal:
        instr, ints, fps, is_mem = decoded(word)
        ready = now
        for r in ints:
            if self.int_ready[r] > ready:
                ready = self.int_ready[r]
        for f in fps:
            if self.fp_ready[f] > ready:
                ready = self.fp_ready[f]
        if ready > now:
            return Proposal(Plan.WAIT, instr, wait_until=ready)
        if is_mem:
            return Proposal(Plan.MEM, instr, request=self._data_request(instr))
        return Proposal(Plan.EXEC, instr)

    def _data_request(self, instr: Instruction) -> MemRequest:
        op = instr.opcode
        addr = (self.iregs[instr.rs1] + instr.imm) & MASK32
        kind = _ACCESS[op]
        width = instr.info.width  # type: ignore[union-attr]
        data = None
        if op is Opcode.SW or op is Opcode.SB:
            data = self.iregs[instr.rs2] & ((1 << (8 * width)) - 1)
        elif op is Opcode.FST:
            data = double_to_bits(self.fregs[instr.fs2])
        return MemRequest(self.tid, kind, addr, width, data)

    def step(self, proposal: Proposal, grant: Grant | None, now: int) -> None:
        """Carry out a proposal. Raises ThreadFault or BusFault on machine faults."""
        self._tail = []
        plan = proposal.plan
        if plan is Plan.EXEC:
            self._execute(proposal.instr, now)  # type: ignore[arg-type]
        elif plan is Plan.WAIT:
            self._stall(now, proposal.instr, StallCause.FP_BUSY, proposal.wait_until - now)
            self.ready_at = proposal.wait_until
        elif plan is Plan.MEM:
            if grant is None or not grant.granted:
                self._refused(proposal, grant, now)
                return
            resp = self.mem.access(proposal.request, now)  # type: ignore[arg-type]
            self.stats.dcache_accesses += 1
            self.stats.dcache_hits += resp.hit
            self._execute_mem(proposal.instr, resp, now)  # type: ignore[arg-type]
        else:
            self._fetch(proposal, grant, now)

    def _fetch(self, proposal: Proposal, grant: Grant | None, now: int) -> None:
        if grant is None or not grant.granted:
            self._refused(proposal, grant, now)
            return
        req = proposal.request
        resp = self.mem.access(req, now)  # type: ignore[arg-type]
        self.stats.icache_accesses += 1
        self.stats.icache_hits += resp.hit
        self.ibuf.fill_pair(req.addr, resp.data or 0)  # type: ignore[union-attr]
        self._fetched_pc = self.pc
        if resp.done_at > now:
            self._miss_stall(now, None, resp, resp.done_at - now)
            self.ready_at = resp.done_at
            return
        follow = self._plan(self.ibuf.lookup(self.pc), now)  # type: ignore[arg-type]
        instr = follow.instr
        if follow.plan is Plan.MEM:
            # the port was used for the fetch this cycle
            self._stall(now, instr, StallCause.FETCH, 1)
            self.ready_at = now + 1
        elif follow.plan is Plan.WAIT:
            self._stall(now, instr, StallCause.FP_BUSY, follow.wait_until - now)
            self.ready_at = follow.wait_until
        else:
            self._execute(instr, now)  # type: ignore[arg-type]

    def _refused(self, proposal: Proposal, grant: Grant | None, now: int) -> None:
        status = grant.status if grant is not None else GrantStatus.LOST
        until = grant.until if grant is not None and status is not GrantStatus.LOST else now + 1
        until = max(until, now + 1)
        self._stall(now, proposal.instr, _REFUSAL_CAUSE[status], until - now)
        self.ready_at = until

    # --- accounting ----------------------------------------------------------

    def _stall(self, now: int, instr: Instruction | None, cause: StallCause, cycles: int) -> None:
        if cycles <= 0:
            return
        self.stats.stall_cycles[cause] += cycles
        self._tail.append((cause, cycles))
        if self.trace is not None:
            name = instr.mnemonic if instr is not None else "-"
            self.trace.record(now, self.tid, self.pc, name, "stall", cause.value, cycles)

    def _miss_stall(self, now: int, instr: Instruction | None, resp: MemResponse, cycles: int) -> None:
        """Book ``cycles`` of memory wait: queue time first, then own miss time."""
        queued = min(resp.queued, cycles)
        self._stall(now, instr, StallCause.BLOCKED_BY_OTHER_MISS, queued)
        self._stall(now, instr, StallCause.OWN_MISS, cycles - queued)

    def _retire(self, instr: Instruction, now: int, next_pc: int) -> None:
        stats = self.stats
        stats.instructions_retired += 1
        if self._fetched_pc == self.pc:
            self._fetched_pc = None
        else:
            stats.ibuf_hits += 1
        if self.trace is not None:
            self.trace.record(now, self.tid, self.pc, instr.mnemonic, "retire")
        self.pc = next_pc
        self.ready_at = now + 1

    # --- execution -----------------------------------------------------------

    def _execute_mem(self, instr: Instruction, resp: MemResponse, now: int) -> None:
        op = instr.opcode
        if op is Opcode.LW or op is Opcode.LB:
            self.set_reg(instr.rd, resp.data or 0)
        elif op is Opcode.FLD:
            self.fregs[instr.fd] = bits_to_double(resp.data or 0)
        elif op is Opcode.TAS:
            self.set_reg(instr.rd, resp.data or 0)
            self.stats.atomic_ops += 1
        pc = self.pc
        self._retire(instr, now, pc + 4)
        atomic = 1 if op is Opcode.TAS else 0
        self._miss_stall(now, instr, resp, resp.done_at - now - atomic)
        self._stall(now, instr, StallCause.ATOMIC, atomic)
        self.ready_at = resp.done_at + 1

    def _execute(self, instr: Instruction, now: int) -> None:
        op = instr.opcode
        cls = instr.op_class
        iregs = self.iregs
        pc = self.pc
        next_pc = pc + 4

        if cls is OpClass.INT_ALU:
            fn = _RRR.get(op)
            if fn is not None:
                self.set_reg(instr.rd, fn(iregs[instr.rs1], iregs[instr.rs2]))
            elif op is Opcode.LUI:
                self.set_reg(instr.rd, (instr.imm & 0xFFFF) << 16)
            else:
                self.set_reg(instr.rd, _RRI[op](iregs[instr.rs1], instr.imm))
            self._retire(instr, now, next_pc)
            return

        if cls is OpClass.BRANCH:
            taken = _BRANCH[op](iregs[instr.rs1], iregs[instr.rs2])
            target = (pc + 4 * instr.imm) & MASK32
            self.stats.branches += 1
            missed = self.predictor.resolve_branch(pc, taken, target)
            self._retire(instr, now, target if taken else next_pc)
            if missed:
                self._mispredicted(instr, now)
            return

        if cls is OpClass.JUMP:
            self.stats.branches += 1
            if op is Opcode.JAL:
                target = (pc + 4 * instr.target) & MASK32
                missed = self.predictor.resolve_jump(pc, target, is_return=False)
                self.predictor.ras.push(next_pc)
                self.set_reg(LINK_REG, next_pc)
            else:
                target = (iregs[instr.rs1] + instr.imm) & MASK32
                if target & 3:
                    raise ThreadFault("misaligned_pc", f"jump target {target:#010x}")
                is_return = instr.rs1 == LINK_REG and instr.rd == 0
                missed = self.predictor.resolve_jump(pc, target, is_return=is_return)
                if instr.rd == LINK_REG:
                    self.predictor.ras.push(next_pc)
                self.set_reg(instr.rd, next_pc)
            self._retire(instr, now, target)
            if missed:
                self._mispredicted(instr, now)
            return

        if cls is OpClass.FP_SHORT:
            fregs = self.fregs
            ready = now + self.timing.fp_short_latency
            if op is Opcode.FLT:
                self.set_reg(instr.rd, int(fregs[instr.fs1] < fregs[instr.fs2]))
                self.int_ready[instr.rd] = ready
            elif op is Opcode.FDTOI:
                self.set_reg(instr.rd, fp_to_int(fregs[instr.fs1]))
                self.int_ready[instr.rd] = ready
            elif op is Opcode.FITOD:
                fregs[instr.fd] = float(signed32(iregs[instr.rs1]))
                self.fp_ready[instr.fd] = ready
            elif op is Opcode.FCVT:
                fregs[instr.fd] = to_single(fregs[instr.fs1])
                self.fp_ready[instr.fd] = ready
            else:
                fregs[instr.fd] = _FFF[op](fregs[instr.fs1], fregs[instr.fs2])
                self.fp_ready[instr.fd] = ready
            self.stats.fp_ops += 1
            self._retire(instr, now, next_pc)
            return

        if cls is OpClass.FP_LONG:
            fregs = self.fregs
            if op in _FFF:
                fregs[instr.fd] = _FFF[op](fregs[instr.fs1], fregs[instr.fs2])
            else:
                fregs[instr.fd] = _FF[op](fregs[instr.fs1])
            single = op is Opcode.FDIVS or op is Opcode.FSQRTS
            busy = self.timing.fp_long_single if single else self.timing.fp_long_double
            self.stats.fp_ops += 1
            self._retire(instr, now, next_pc)
            self._stall(now, instr, StallCause.FP_LONG, busy - 1)
            self.ready_at = now + busy
            return

        if cls is OpClass.INT_DIV:
            self.set_reg(instr.rd, _RRR[op](iregs[instr.rs1], iregs[instr.rs2]))
            busy = self.timing.int_div_cycles
            self._retire(instr, now, next_pc)
            self._stall(now, instr, StallCause.INT_DIV, busy - 1)
            self.ready_at = now + busy
            return

        if cls is OpClass.SYS:
            if op is Opcode.TID:
                self.set_reg(instr.rd, self.tid)
            elif op is Opcode.RDCYC:
                self.set_reg(instr.rd, now)
            self._retire(instr, now, next_pc)
            if op is Opcode.HALT:
                self.pc = pc
                self.halted = True
                self.halt_cycle = now
                self.stats.cycles_active += now + 1 - self.active_since
                self.active_since = now + 1
            return

        raise ThreadFault("illegal_instruction", f"word {instr.raw or 0:#010x}")

    def _mispredicted(self, instr: Instruction, now: int) -> None:
        self.stats.mispredicts += 1
        penalty = self.timing.mispredict_penalty
        self._stall(now, instr, StallCause.MISPREDICT, penalty)
        self.ready_at = now + 1 + penalty
