"""Two-pass assembler for AJT-lite source text.

Pass one lays out every statement and collects labels; pass two encodes.
Errors never stop a pass: every bad line is reported in one AssemblyError.
"""

from __future__ import annotations

import re
import struct
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum

from ..isa import (
    BY_MNEMONIC,
    N_FREGS,
    N_IREGS,
    OPCODES,
    ZERO_EXTENDED,
    EncodingRangeError,
    Format,
    Instruction,
    Opcode,
    Program,
    encode,
)


class AsmErrorKind(Enum):
    UNKNOWN_MNEMONIC = "UnknownMnemonic"
    DUPLICATE_LABEL = "DuplicateLabel"
    UNDEFINED_LABEL = "UndefinedLabel"
    OPERAND_COUNT = "OperandCount"
    IMMEDIATE_RANGE = "ImmediateRange"
    BAD_DIRECTIVE = "BadDirective"
    BAD_OPERAND = "BadOperand"


@dataclass(frozen=True)
class AsmError:
    """One diagnostic, pointing at a 1-based source line."""

    line: int
    kind: AsmErrorKind
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.kind.value}: {self.message}"


class AssemblyError(Exception):
    """Assembly failed; ``errors`` lists every diagnostic in line order."""

    def __init__(self, errors: list[AsmError]):
        self.errors = sorted(errors, key=lambda e: e.line)
        super().__init__("\n".join(str(e) for e in self.errors))


class _LineError(Exception):
    def __init__(self, kind: AsmErrorKind, message: str):
        super().__init__(message)
        self.kind = kind
        self.message = message


_LABEL_RE = re.compile(r"^\s*([A-Za-z_.$][\w.$]*)\s*:")
_SYMBOL_RE = re.compile(r"^[A-Za-z_.$][\w.$]*$")
_SYMBOL_OFFSET_RE = re.compile(r"^([A-Za-z_.$][\w.$]*)\s*([+-])\s*(\w+)$")
_MEM_RE = re.compile(r"^(.*)\((\s*\w+\s*)\)$")

_REG_ALIASES = {"zero": 0, "sp": 29, "ra": 31}

PSEUDO_SIZES: dict[str, int] = {"la": 2, "mv": 1, "j": 1, "call": 1, "ret": 1}


@dataclass
class _Statement:
    line: int
    address: int
    mnemonic: str
    operands: list[str]
    size: int  # words


@dataclass
class _Layout:
    base: int | None = None
    location: int = 0
    statements: list[_Statement] = field(default_factory=list)
    labels: dict[str, int] = field(default_factory=dict)
    globals: dict[str, int] = field(default_factory=dict)  # label -> line
    words: dict[int, int] = field(default_factory=dict)


def _strip_comment(text: str) -> str:
    for marker in (";", "#"):
        pos = text.find(marker)
        if pos >= 0:
            text = text[:pos]
    return text.strip()


def _split_operands(text: str) -> list[str]:
    if not text.strip():
        return []
    return [part.strip() for part in text.split(",")]


def parse_int(token: str) -> int:
    try:
        return int(token.replace("_", ""), 0)
    except ValueError:
        raise _LineError(AsmErrorKind.BAD_OPERAND, f"not a number: {token!r}") from None


def _is_number(token: str) -> bool:
    try:
        int(token.replace("_", ""), 0)
    except ValueError:
        return False
    return True


def _parse_reg(token: str, prefix: str, limit: int) -> int:
    token = token.strip().lower()
    if prefix == "r" and token in _REG_ALIASES:
        return _REG_ALIASES[token]
    if not token.startswith(prefix) or not token[1:].isdigit():
        kind = "integer" if prefix == "r" else "FP"
        raise _LineError(AsmErrorKind.BAD_OPERAND, f"expected {kind} register, got {token!r}")
    index = int(token[1:])
    if index >= limit:
        raise _LineError(AsmErrorKind.BAD_OPERAND, f"register {token} does not exist")
    return index


def ireg(token: str) -> int:
    return _parse_reg(token, "r", N_IREGS)


def freg(token: str) -> int:
    return _parse_reg(token, "f", N_FREGS)


def _hi_lo(value: int) -> tuple[int, int]:
    """Split a 32-bit value into signed-encoded LUI and ORI immediates."""
    value &= 0xFFFFFFFF
    hi, lo = value >> 16, value & 0xFFFF
    return (hi - 0x10000 if hi & 0x8000 else hi), (lo - 0x10000 if lo & 0x8000 else lo)


class Assembler:
    """Single-use assembler state for one translation unit."""

    def __init__(self, source: str):
        self.source = source
        self.errors: list[AsmError] = []
        self.layout = _Layout()

    def error(self, line: int, kind: AsmErrorKind, message: str) -> None:
        self.errors.append(AsmError(line, kind, message))

    # -- pass one --------------------------------------------------------

    def _place(self, words: int) -> int:
        if self.layout.base is None:
            self.layout.base = self.layout.location
        address = self.layout.location
        self.layout.location += 4 * words
        return address

    def _define_label(self, lineno: int, name: str) -> None:
        if name in self.layout.labels:
            self.error(lineno, AsmErrorKind.DUPLICATE_LABEL, f"label {name!r} already defined")
            return
        self.layout.labels[name] = self.layout.location

    def _directive_size(self, lineno: int, name: str, operands: list[str]) -> int:
        layout = self.layout
        if name == ".org":
            if len(operands) != 1:
                raise _LineError(AsmErrorKind.BAD_DIRECTIVE, ".org takes one address")
            address = parse_int(operands[0])
            if address % 4:
                raise _LineError(AsmErrorKind.BAD_DIRECTIVE, f".org {address:#x} is not word aligned")
            if layout.base is not None and address < layout.location:
                raise _LineError(AsmErrorKind.BAD_DIRECTIVE, ".org cannot move backwards")
            if layout.base is None:
                layout.location = address
                return 0
            return (address - layout.location) // 4
        if name == ".align":
            if len(operands) != 1:
                raise _LineError(AsmErrorKind.BAD_DIRECTIVE, ".align takes one byte boundary")
            boundary = parse_int(operands[0])
            if boundary < 4 or boundary & (boundary - 1):
                raise _LineError(AsmErrorKind.BAD_DIRECTIVE, f".align {boundary} is not a power of two >= 4")
            return (-layout.location % boundary) // 4
        if name == ".word":
            if not operands:
                raise _LineError(AsmErrorKind.OPERAND_COUNT, ".word needs at least one value")
            return len(operands)
        if name == ".double":
            if not operands:
                raise _LineError(AsmErrorKind.OPERAND_COUNT, ".double needs at least one value")
            return 2 * len(operands)
        if name == ".space":
            if len(operands) != 1:
                raise _LineError(AsmErrorKind.BAD_DIRECTIVE, ".space takes one byte count")
            count = parse_int(operands[0])
            if count < 0 or count % 4:
                raise _LineError(AsmErrorKind.BAD_DIRECTIVE, ".space size must be a multiple of 4")
            return count // 4
        if name == ".global":
            if len(operands) != 1 or not _SYMBOL_RE.match(operands[0]):
                raise _LineError(AsmErrorKind.BAD_DIRECTIVE, ".global takes one label")
            layout.globals.setdefault(operands[0], lineno)
            return 0
        raise _LineError(AsmErrorKind.BAD_DIRECTIVE, f"unknown directive {name}")

    def _instruction_size(self, mnemonic: str, operands: list[str]) -> int:
        if mnemonic == "li":
            if len(operands) != 2:
                raise _LineError(AsmErrorKind.OPERAND_COUNT, "li takes a register and a value")
            if _is_number(operands[1]):
                value = parse_int(operands[1])
                return 1 if -(1 << 15) <= value < (1 << 15) else 2
            return 2
        if mnemonic in PSEUDO_SIZES:
            return PSEUDO_SIZES[mnemonic]
        if mnemonic in BY_MNEMONIC:
            return 1
        raise _LineError(AsmErrorKind.UNKNOWN_MNEMONIC, f"unknown mnemonic {mnemonic!r}")

    def first_pass(self) -> None:
        for lineno, raw in enumerate(self.source.splitlines(), start=1):
            text = _strip_comment(raw)
            while True:
                match = _LABEL_RE.match(text)
                if not match:
                    break
                self._define_label(lineno, match.group(1))
                text = text[match.end() :].strip()
            if not text:
                continue
            head, *rest = text.split(None, 1)
            mnemonic = head.lower()
            operands = _split_operands(rest[0] if rest else "")
            try:
                if mnemonic.startswith("."):
                    words = self._directive_size(lineno, mnemonic, operands)
                    if mnemonic in (".org", ".global") and words == 0:
                        continue
                    if mnemonic in (".org", ".align", ".space"):
                        mnemonic, operands = ".zero", []
                else:
                    words = self._instruction_size(mnemonic, operands)
            except _LineError as exc:
                self.error(lineno, exc.kind, exc.message)
                continue
            address = self._place(words)
            self.layout.statements.append(_Statement(lineno, address, mnemonic, operands, words))

    # -- pass two --------------------------------------------------------

    def value(self, token: str) -> int:
        """Integer literal, label, or label +/- literal."""
        token = token.strip()
        if _is_number(token):
            return parse_int(token)
        if _SYMBOL_RE.match(token):
            if token not in self.layout.labels:
                raise _LineError(AsmErrorKind.UNDEFINED_LABEL, f"undefined label {token!r}")
            return self.layout.labels[token]
        match = _SYMBOL_OFFSET_RE.match(token)
        if match:
            base = self.value(match.group(1))
            offset = parse_int(match.group(3))
            return base + offset if match.group(2) == "+" else base - offset
        raise _LineError(AsmErrorKind.BAD_OPERAND, f"cannot evaluate {token!r}")

    def _pc_offset(self, token: str, pc: int, bits: int) -> int:
        token = token.strip()
        if token.startswith("@"):
            offset = parse_int(token[1:])
        else:
            target = self.value(token)
            if target % 4:
                raise _LineError(AsmErrorKind.BAD_OPERAND, f"branch target {target:#x} not word aligned")
            offset = (target - pc) // 4
        limit = 1 << (bits - 1)
        if not -limit <= offset < limit:
            raise _LineError(AsmErrorKind.IMMEDIATE_RANGE, f"target {token} is {offset} words away, beyond {bits}-bit reach")
        return offset

    def _imm(self, token: str, opcode: Opcode) -> int:
        value = self.value(token)
        if opcode in (Opcode.SLLI, Opcode.SRLI, Opcode.SRAI):
            low, high = 0, 31
        elif opcode in ZERO_EXTENDED:
            low, high = -(1 << 15), (1 << 16) - 1
        else:
            low, high = -(1 << 15), (1 << 15) - 1
        if not low <= value <= high:
            raise _LineError(AsmErrorKind.IMMEDIATE_RANGE, f"immediate {value} outside {low}..{high}")
        return value - (1 << 16) if value >= (1 << 15) else value

    def _mem(self, token: str, opcode: Opcode) -> tuple[int, int]:
        match = _MEM_RE.match(token.strip())
        if not match:
            raise _LineError(AsmErrorKind.BAD_OPERAND, f"expected offset(register), got {token!r}")
        offset = match.group(1).strip() or "0"
        return self._imm(offset, opcode), ireg(match.group(2))

    def encode_instruction(self, mnemonic: str, operands: list[str], pc: int) -> list[int]:
        if mnemonic == "li":
            rd = ireg(operands[0])
            value = self.value(operands[1])
            if not -(1 << 31) <= value < (1 << 32):
                raise _LineError(AsmErrorKind.IMMEDIATE_RANGE, f"li value {value} does not fit 32 bits")
            if _is_number(operands[1]) and -(1 << 15) <= value < (1 << 15):
                return [encode(Instruction(Opcode.ADDI, rd=rd, imm=value))]
            hi, lo = _hi_lo(value)
            return [
                encode(Instruction(Opcode.LUI, rd=rd, imm=hi)),
                encode(Instruction(Opcode.ORI, rd=rd, rs1=rd, imm=lo)),
            ]
        if mnemonic in PSEUDO_SIZES:
            return self._pseudo(mnemonic, operands, pc)

        opcode = BY_MNEMONIC[mnemonic]
        fmt = OPCODES[opcode].fmt
        expected = _OPERAND_COUNTS[fmt]
        if len(operands) != expected:
            raise _LineError(
                AsmErrorKind.OPERAND_COUNT,
                f"{mnemonic} takes {expected} operand(s), got {len(operands)}",
            )
        builder = _BUILDERS[fmt]
        instr = builder(self, opcode, operands, pc)
        try:
            return [encode(instr)]
        except EncodingRangeError as exc:
            raise _LineError(AsmErrorKind.IMMEDIATE_RANGE, str(exc)) from None

    def _pseudo(self, mnemonic: str, operands: list[str], pc: int) -> list[int]:
        counts = {"la": 2, "mv": 2, "j": 1, "call": 1, "ret": 0}
        if len(operands) != counts[mnemonic]:
            raise _LineError(
                AsmErrorKind.OPERAND_COUNT,
                f"{mnemonic} takes {counts[mnemonic]} operand(s), got {len(operands)}",
            )
        if mnemonic == "la":
            rd = ireg(operands[0])
            hi, lo = _hi_lo(self.value(operands[1]))
            return [
                encode(Instruction(Opcode.LUI, rd=rd, imm=hi)),
                encode(Instruction(Opcode.ORI, rd=rd, rs1=rd, imm=lo)),
            ]
        if mnemonic == "mv":
            return [encode(Instruction(Opcode.ADDI, rd=ireg(operands[0]), rs1=ireg(operands[1])))]
        if mnemonic == "j":
            return [encode(Instruction(Opcode.BEQ, imm=self._pc_offset(operands[0], pc, 16)))]
        if mnemonic == "call":
            return [encode(Instruction(Opcode.JAL, target=self._pc_offset(operands[0], pc, 26)))]
        return [encode(Instruction(Opcode.JALR, rs1=31))]

    def _encode_data(self, stmt: _Statement) -> list[int]:
        if stmt.mnemonic == ".zero":
            return [0] * stmt.size
        if stmt.mnemonic == ".word":
            words = []
            for token in stmt.operands:
                value = self.value(token)
                if not -(1 << 31) <= value < (1 << 32):
                    raise _LineError(AsmErrorKind.IMMEDIATE_RANGE, f".word value {value} does not fit 32 bits")
                words.append(value & 0xFFFFFFFF)
            return words
        words = []
        for token in stmt.operands:
            try:
                number = float(token)
            except ValueError:
                raise _LineError(AsmErrorKind.BAD_OPERAND, f"not a double: {token!r}") from None
            low, high = struct.unpack("<II", struct.pack("<d", number))
            words.extend((low, high))
        return words

    def second_pass(self) -> None:
        for stmt in self.layout.statements:
            try:
                if stmt.mnemonic.startswith("."):
                    words = self._encode_data(stmt)
                else:
                    words = self.encode_instruction(stmt.mnemonic, stmt.operands, stmt.address)
            except _LineError as exc:
                self.error(stmt.line, exc.kind, exc.message)
                continue
            for index, word in enumerate(words):
                self.layout.words[stmt.address + 4 * index] = word

    def build(self) -> Program:
        self.first_pass()
        self.second_pass()
        for name, lineno in self.layout.globals.items():
            if name not in self.layout.labels:
                self.error(lineno, AsmErrorKind.UNDEFINED_LABEL, f".global of undefined label {name!r}")
        if self.errors:
            raise AssemblyError(self.errors)

        base = self.layout.base if self.layout.base is not None else self.layout.location
        end = self.layout.location
        words = tuple(self.layout.words.get(addr, 0) for addr in range(base, end, 4))
        exported = {name: self.layout.labels[name] for name in self.layout.globals}
        try:
            return Program(base, words, entry_points=exported, symbols=dict(self.layout.labels))
        except ValueError as exc:
            raise AssemblyError([AsmError(0, AsmErrorKind.BAD_DIRECTIVE, str(exc))]) from None


# -- per-format operand builders -----------------------------------------

_Builder = Callable[[Assembler, Opcode, list[str], int], Instruction]


def _rrr(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    return Instruction(op, rd=ireg(ops[0]), rs1=ireg(ops[1]), rs2=ireg(ops[2]))


def _rri(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    return Instruction(op, rd=ireg(ops[0]), rs1=ireg(ops[1]), imm=asm._imm(ops[2], op))


def _ri(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    return Instruction(op, rd=ireg(ops[0]), imm=asm._imm(ops[1], op))


def _store(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    imm, base = asm._mem(ops[1], op)
    return Instruction(op, rs2=ireg(ops[0]), rs1=base, imm=imm)


def _mem(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    imm, base = asm._mem(ops[1], op)
    return Instruction(op, rd=ireg(ops[0]), rs1=base, imm=imm)


def _branch(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    return Instruction(op, rs1=ireg(ops[0]), rs2=ireg(ops[1]), imm=asm._pc_offset(ops[2], pc, 16))


def _jump(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    return Instruction(op, target=asm._pc_offset(ops[0], pc, 26))


def _fff(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    return Instruction(op, fd=freg(ops[0]), fs1=freg(ops[1]), fs2=freg(ops[2]))


def _ff(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    return Instruction(op, fd=freg(ops[0]), fs1=freg(ops[1]))


def _rff(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    return Instruction(op, rd=ireg(ops[0]), fs1=freg(ops[1]), fs2=freg(ops[2]))


def _fr(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    return Instruction(op, fd=freg(ops[0]), rs1=ireg(ops[1]))


def _rf(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    return Instruction(op, rd=ireg(ops[0]), fs1=freg(ops[1]))


def _fload(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    imm, base = asm._mem(ops[1], op)
    return Instruction(op, fd=freg(ops[0]), rs1=base, imm=imm)


def _fstore(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    imm, base = asm._mem(ops[1], op)
    return Instruction(op, fs2=freg(ops[0]), rs1=base, imm=imm)


def _r(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    return Instruction(op, rd=ireg(ops[0]))


def _none(asm: Assembler, op: Opcode, ops: list[str], pc: int) -> Instruction:
    return Instruction(op)


_BUILDERS: dict[Format, _Builder] = {
    Format.RRR: _rrr,
    Format.RRI: _rri,
    Format.RI: _ri,
    Format.STORE: _store,
    Format.MEM: _mem,
    Format.BRANCH: _branch,
    Format.JUMP: _jump,
    Format.FFF: _fff,
    Format.FF: _ff,
    Format.RFF: _rff,
    Format.FR: _fr,
    Format.RF: _rf,
    Format.FLOAD: _fload,
    Format.FSTORE: _fstore,
    Format.R: _r,
    Format.NONE: _none,
}

_OPERAND_COUNTS: dict[Format, int] = {
    Format.RRR: 3,
    Format.RRI: 3,
    Format.RI: 2,
    Format.STORE: 2,
    Format.MEM: 2,
    Format.BRANCH: 3,
    Format.JUMP: 1,
    Format.FFF: 3,
    Format.FF: 2,
    Format.RFF: 3,
    Format.FR: 2,
    Format.RF: 2,
    Format.FLOAD: 2,
    Format.FSTORE: 2,
    Format.R: 1,
    Format.NONE: 0,
}


def assemble(source: str) -> Program:
    """Assemble source text into a Program, raising AssemblyError on any diagnostic."""
    return Assembler(source).build()
