"""Opcode table of the AJT-lite instruction set.

Every opcode has exactly one class, which picks its pipeline flow, and one
operand format, which picks the field layout of its 32-bit word.
"""

from dataclasses import dataclass
from enum import Enum, IntEnum


class OpClass(Enum):
    """Pipeline flow of an instruction."""

    INT_ALU = "int_alu"
    INT_DIV = "int_div"
    LOAD = "load"
    STORE = "store"
    BRANCH = "branch"
    JUMP = "jump"
    ATOMIC = "atomic"
    FP_SHORT = "fp_short"
    FP_LONG = "fp_long"
    FP_MEM = "fp_mem"
    SYS = "sys"
    ILLEGAL = "illegal"


class Format(Enum):
    """Operand layout. Slot A is bits 25..21, B 20..16, C 15..11, IMM 15..0."""

    RRR = "rrr"  # rd, rs1, rs2
    RRI = "rri"  # rd, rs1, imm
    RI = "ri"  # rd, imm
    STORE = "store"  # rs2 -> imm(rs1)
    BRANCH = "branch"  # rs1, rs2, offset
    JUMP = "jump"  # 26-bit target
    MEM = "mem"  # rd <- imm(rs1)
    FFF = "fff"  # fd, fs1, fs2
    FF = "ff"  # fd, fs1
    RFF = "rff"  # rd, fs1, fs2
    FR = "fr"  # fd, rs1
    RF = "rf"  # rd, fs1
    FLOAD = "fload"  # fd <- imm(rs1)
    FSTORE = "fstore"  # fs2 -> imm(rs1)
    R = "r"  # rd
    NONE = "none"


class Opcode(IntEnum):
    """Six-bit primary opcodes. Zero is reserved and always ILLEGAL."""

    ILLEGAL = 0
    ADD = 1
    SUB = 2
    AND = 3
    OR = 4
    XOR = 5
    SLL = 6
    SRL = 7
    SRA = 8
    SLT = 9
    MUL = 10
    ADDI = 11
    ANDI = 12
    ORI = 13
    XORI = 14
    SLTI = 15
    SLLI = 16
    SRLI = 17
    SRAI = 18
    LUI = 19
    DIV = 20
    REM = 21
    LW = 22
    LB = 23
    SW = 24
    SB = 25
    BEQ = 26
    BNE = 27
    BLT = 28
    BGE = 29
    JAL = 30
    JALR = 31
    TAS = 32
    FADD = 33
    FSUB = 34
    FMUL = 35
    FCVT = 36
    FLT = 37
    FITOD = 38
    FDTOI = 39
    FDIV = 40
    FSQRT = 41
    FDIVS = 42
    FSQRTS = 43
    FLD = 44
    FST = 45
    TID = 46
    NOP = 47
    HALT = 48
    RDCYC = 49


@dataclass(frozen=True, slots=True)
class OpInfo:
    """Static properties of one opcode."""

    mnemonic: str
    op_class: OpClass
    fmt: Format
    width: int = 0  # memory access width in bytes, 0 for non-memory ops


_C = OpClass
_F = Format

OPCODES: dict[Opcode, OpInfo] = {
    Opcode.ADD: OpInfo("add", _C.INT_ALU, _F.RRR),
    Opcode.SUB: OpInfo("sub", _C.INT_ALU, _F.RRR),
    Opcode.AND: OpInfo("and", _C.INT_ALU, _F.RRR),
    Opcode.OR: OpInfo("or", _C.INT_ALU, _F.RRR),
    Opcode.XOR: OpInfo("xor", _C.INT_ALU, _F.RRR),
    Opcode.SLL: OpInfo("sll", _C.INT_ALU, _F.RRR),
    Opcode.SRL: OpInfo("srl", _C.INT_ALU, _F.RRR),
    Opcode.SRA: OpInfo("sra", _C.INT_ALU, _F.RRR),
    Opcode.SLT: OpInfo("slt", _C.INT_ALU, _F.RRR),
    Opcode.MUL: OpInfo("mul", _C.INT_ALU, _F.RRR),
    Opcode.ADDI: OpInfo("addi", _C.INT_ALU, _F.RRI),
    Opcode.ANDI: OpInfo("andi", _C.INT_ALU, _F.RRI),
    Opcode.ORI: OpInfo("ori", _C.INT_ALU, _F.RRI),
    Opcode.XORI: OpInfo("xori", _C.INT_ALU, _F.RRI),
    Opcode.SLTI: OpInfo("slti", _C.INT_ALU, _F.RRI),
    Opcode.SLLI: OpInfo("slli", _C.INT_ALU, _F.RRI),
    Opcode.SRLI: OpInfo("srli", _C.INT_ALU, _F.RRI),
    Opcode.SRAI: OpInfo("srai", _C.INT_ALU, _F.RRI),
    Opcode.LUI: OpInfo("lui", _C.INT_ALU, _F.RI),
    Opcode.DIV: OpInfo("div", _C.INT_DIV, _F.RRR),
    Opcode.REM: OpInfo("rem", _C.INT_DIV, _F.RRR),
    Opcode.LW: OpInfo("lw", _C.LOAD, _F.MEM, 4),
    Opcode.LB: OpInfo("lb", _C.LOAD, _F.MEM, 1),
    Opcode.SW: OpInfo("sw", _C.STORE, _F.STORE, 4),
    Opcode.SB: OpInfo("sb", _C.STORE, _F.STORE, 1),
    Opcode.BEQ: OpInfo("beq", _C.BRANCH, _F.BRANCH),
    Opcode.BNE: OpInfo("bne", _C.BRANCH, _F.BRANCH),
    Opcode.BLT: OpInfo("blt", _C.BRANCH, _F.BRANCH),
    Opcode.BGE: OpInfo("bge", _C.BRANCH, _F.BRANCH),
    Opcode.JAL: OpInfo("jal", _C.JUMP, _F.JUMP),
    Opcode.JALR: OpInfo("jalr", _C.JUMP, _F.RRI),
    Opcode.TAS: OpInfo("tas", _C.ATOMIC, _F.MEM, 1),
    Opcode.FADD: OpInfo("fadd", _C.FP_SHORT, _F.FFF),
    Opcode.FSUB: OpInfo("fsub", _C.FP_SHORT, _F.FFF),
    Opcode.FMUL: OpInfo("fmul", _C.FP_SHORT, _F.FFF),
    Opcode.FCVT: OpInfo("fcvt", _C.FP_SHORT, _F.FF),
    Opcode.FLT: OpInfo("flt", _C.FP_SHORT, _F.RFF),
    Opcode.FITOD: OpInfo("fitod", _C.FP_SHORT, _F.FR),
    Opcode.FDTOI: OpInfo("fdtoi", _C.FP_SHORT, _F.RF),
    Opcode.FDIV: OpInfo("fdiv", _C.FP_LONG, _F.FFF),
    Opcode.FSQRT: OpInfo("fsqrt", _C.FP_LONG, _F.FF),
    Opcode.FDIVS: OpInfo("fdivs", _C.FP_LONG, _F.FFF),
    Opcode.FSQRTS: OpInfo("fsqrts", _C.FP_LONG, _F.FF),
    Opcode.FLD: OpInfo("fld", _C.FP_MEM, _F.FLOAD, 8),
    Opcode.FST: OpInfo("fst", _C.FP_MEM, _F.FSTORE, 8),
    Opcode.TID: OpInfo("tid", _C.SYS, _F.R),
    Opcode.NOP: OpInfo("nop", _C.SYS, _F.NONE),
    Opcode.HALT: OpInfo("halt", _C.SYS, _F.NONE),
    Opcode.RDCYC: OpInfo("rdcyc", _C.SYS, _F.R),
}

BY_MNEMONIC: dict[str, Opcode] = {info.mnemonic: op for op, info in OPCODES.items()}

# Immediates of these ops are zero-extended at execution time.
ZERO_EXTENDED = frozenset({Opcode.ANDI, Opcode.ORI, Opcode.XORI, Opcode.LUI})

MEMORY_CLASSES = frozenset({OpClass.LOAD, OpClass.STORE, OpClass.ATOMIC, OpClass.FP_MEM})

N_IREGS = 32
N_FREGS = 16
