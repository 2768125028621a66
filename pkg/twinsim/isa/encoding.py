"""Instruction value type and the 32-bit encode/decode pair."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .opcodes import N_FREGS, N_IREGS, OPCODES, Format, OpClass, Opcode, OpInfo

IMM_MIN, IMM_MAX = -(1 << 15), (1 << 15) - 1
TARGET_MIN, TARGET_MAX = -(1 << 25), (1 << 25) - 1
WORD_MASK = 0xFFFFFFFF


class EncodingRangeError(ValueError):
    """An instruction field does not fit its encoding slot."""


# Which Instruction fields each format carries; everything else must stay zero.
_FORMAT_FIELDS: dict[Format, tuple[str, ...]] = {
    Format.RRR: ("rd", "rs1", "rs2"),
    Format.RRI: ("rd", "rs1", "imm"),
    Format.RI: ("rd", "imm"),
    Format.STORE: ("rs2", "rs1", "imm"),
    Format.BRANCH: ("rs1", "rs2", "imm"),
    Format.JUMP: ("target",),
    Format.MEM: ("rd", "rs1", "imm"),
    Format.FFF: ("fd", "fs1", "fs2"),
    Format.FF: ("fd", "fs1"),
    Format.RFF: ("rd", "fs1", "fs2"),
    Format.FR: ("fd", "rs1"),
    Format.RF: ("rd", "fs1"),
    Format.FLOAD: ("fd", "rs1", "imm"),
    Format.FSTORE: ("fs2", "rs1", "imm"),
    Format.R: ("rd",),
    Format.NONE: (),
}

_OPERAND_FIELDS = ("rd", "rs1", "rs2", "fd", "fs1", "fs2", "imm", "target")


@dataclass(frozen=True, slots=True)
class Instruction:
    """Decoded form of one machine word.

    ``raw`` is only set on ILLEGAL instructions so that the original bits
    survive a decode/encode round trip.
    """

    opcode: Opcode
    rd: int = 0
    rs1: int = 0
    rs2: int = 0
    fd: int = 0
    fs1: int = 0
    fs2: int = 0
    imm: int = 0
    target: int = 0
    raw: int | None = None

    @property
    def info(self) -> OpInfo | None:
        return OPCODES.get(self.opcode)

    @property
    def op_class(self) -> OpClass:
        info = OPCODES.get(self.opcode)
        return info.op_class if info else OpClass.ILLEGAL

    @property
    def mnemonic(self) -> str:
        info = OPCODES.get(self.opcode)
        return info.mnemonic if info else "illegal"

    @property
    def is_illegal(self) -> bool:
        return self.opcode == Opcode.ILLEGAL


def illegal(word: int) -> Instruction:
    return Instruction(Opcode.ILLEGAL, raw=word & WORD_MASK)


def _check_reg(name: str, value: int, limit: int) -> None:
    if not 0 <= value < limit:
        raise EncodingRangeError(f"{name}={value} outside 0..{limit - 1}")


def _validate(instr: Instruction, info: OpInfo) -> None:
    used = _FORMAT_FIELDS[info.fmt]
    for name in _OPERAND_FIELDS:
        value = getattr(instr, name)
        if name not in used:
            if value:
                raise EncodingRangeError(f"{info.mnemonic} has no {name} operand (got {value})")
            continue
        if name in ("rd", "rs1", "rs2"):
            _check_reg(name, value, N_IREGS)
        elif name in ("fd", "fs1", "fs2"):
            _check_reg(name, value, N_FREGS)
        elif name == "imm" and not IMM_MIN <= value <= IMM_MAX:
            raise EncodingRangeError(f"immediate {value} outside 16-bit signed range")
        elif name == "target" and not TARGET_MIN <= value <= TARGET_MAX:
            raise EncodingRangeError(f"jump offset {value} outside 26-bit signed range")


def encode(instr: Instruction) -> int:
    """Encode an instruction into its 32-bit word."""
    if instr.opcode == Opcode.ILLEGAL:
        return (instr.raw or 0) & WORD_MASK
    info = OPCODES[instr.opcode]
    _validate(instr, info)

    word = int(instr.opcode) << 26
    fmt = info.fmt
    if fmt == Format.JUMP:
        return word | (instr.target & 0x3FFFFFF)

    # (slot A, slot B, slot C) in format order
    slots: tuple[int, int, int]
    if fmt in (Format.RRR,):
        slots = (instr.rd, instr.rs1, instr.rs2)
    elif fmt in (Format.RRI, Format.MEM, Format.RI, Format.R):
        slots = (instr.rd, instr.rs1, 0)
    elif fmt == Format.STORE:
        slots = (instr.rs2, instr.rs1, 0)
    elif fmt == Format.BRANCH:
        slots = (instr.rs1, instr.rs2, 0)
    elif fmt == Format.FFF:
        slots = (instr.fd, instr.fs1, instr.fs2)
    elif fmt == Format.FF:
        slots = (instr.fd, instr.fs1, 0)
    elif fmt == Format.RFF:
        slots = (instr.rd, instr.fs1, instr.fs2)
    elif fmt == Format.FR:
        slots = (instr.fd, instr.rs1, 0)
    elif fmt == Format.RF:
        slots = (instr.rd, instr.fs1, 0)
    elif fmt == Format.FLOAD:
        slots = (instr.fd, instr.rs1, 0)
    elif fmt == Format.FSTORE:
        slots = (instr.fs2, instr.rs1, 0)
    else:
        slots = (0, 0, 0)

    word |= slots[0] << 21 | slots[1] << 16 | slots[2] << 11
    if "imm" in _FORMAT_FIELDS[fmt]:
        word |= instr.imm & 0xFFFF
    return word


def _sext(value: int, bits: int) -> int:
    sign = 1 << (bits - 1)
    return (value & (sign - 1)) - (value & sign)


@lru_cache(maxsize=1 << 16)
def decode(word: int) -> Instruction:
    """Decode a 32-bit word. Total: anything unrecognized is ILLEGAL."""
    word &= WORD_MASK
    try:
        opcode = Opcode(word >> 26)
    except ValueError:
        return illegal(word)
    if opcode == Opcode.ILLEGAL:
        return illegal(word)

    fmt = OPCODES[opcode].fmt
    a = (word >> 21) & 0x1F
    b = (word >> 16) & 0x1F
    c = (word >> 11) & 0x1F
    low11 = word & 0x7FF
    low16 = word & 0xFFFF
    imm = _sext(low16, 16)

    if fmt == Format.JUMP:
        return Instruction(opcode, target=_sext(word & 0x3FFFFFF, 26))
    if fmt == Format.NONE:
        return Instruction(opcode) if word & 0x3FFFFFF == 0 else illegal(word)
    if fmt == Format.R:
        return Instruction(opcode, rd=a) if word & 0x1FFFFF == 0 else illegal(word)
    if fmt == Format.RRR:
        return Instruction(opcode, rd=a, rs1=b, rs2=c) if low11 == 0 else illegal(word)
    if fmt in (Format.RRI, Format.MEM):
        return Instruction(opcode, rd=a, rs1=b, imm=imm)
    if fmt == Format.RI:
        return Instruction(opcode, rd=a, imm=imm) if b == 0 else illegal(word)
    if fmt == Format.STORE:
        return Instruction(opcode, rs2=a, rs1=b, imm=imm)
    if fmt == Format.BRANCH:
        return Instruction(opcode, rs1=a, rs2=b, imm=imm)

    # FP formats: FP register slots must name one of the 16 FP registers.
    if fmt == Format.FFF:
        if low11 or a >= N_FREGS or b >= N_FREGS or c >= N_FREGS:
            return illegal(word)
        return Instruction(opcode, fd=a, fs1=b, fs2=c)
    if fmt == Format.FF:
        if low16 or a >= N_FREGS or b >= N_FREGS:
            return illegal(word)
        return Instruction(opcode, fd=a, fs1=b)
    if fmt == Format.RFF:
        if low11 or b >= N_FREGS or c >= N_FREGS:
            return illegal(word)
        return Instruction(opcode, rd=a, fs1=b, fs2=c)
    if fmt == Format.FR:
        if low16 or a >= N_FREGS:
            return illegal(word)
        return Instruction(opcode, fd=a, rs1=b)
    if fmt == Format.RF:
        if low16 or b >= N_FREGS:
            return illegal(word)
        return Instruction(opcode, rd=a, fs1=b)
    if fmt == Format.FLOAD:
        return Instruction(opcode, fd=a, rs1=b, imm=imm) if a < N_FREGS else illegal(word)
    if fmt == Format.FSTORE:
        return Instruction(opcode, fs2=a, rs1=b, imm=imm) if a < N_FREGS else illegal(word)
    return illegal(word)


def operand_fields(fmt: Format) -> tuple[str, ...]:
    """Instruction fields carried by a format, in assembly operand order."""
    return _FORMAT_FIELDS[fmt]
