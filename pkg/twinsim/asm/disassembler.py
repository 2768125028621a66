"""Disassembler producing re-assemblable source."""

from __future__ import annotations

from ..isa import OPCODES, ZERO_EXTENDED, Format, Instruction, OpClass, Opcode, Program, decode, encode

_SHIFTS = frozenset({Opcode.SLLI, Opcode.SRLI, Opcode.SRAI})


def format_instruction(instr: Instruction, target: str | None = None) -> str:
    """Render one decoded instruction in canonical (pseudo-free) syntax.

    ``target`` replaces the numeric offset of branches and JAL when given.
    """
    if instr.is_illegal:
        return f".word {instr.raw or 0:#010x}"
    if instr.opcode in _SHIFTS and not 0 <= instr.imm <= 31:
        # legal encoding the assembler refuses to write
        return f".word {encode(instr):#010x}"
    info = OPCODES[instr.opcode]
    name = info.mnemonic
    imm = f"{instr.imm & 0xFFFF:#x}" if instr.opcode in ZERO_EXTENDED else str(instr.imm)
    fmt = info.fmt
    if fmt == Format.RRR:
        return f"{name} r{instr.rd}, r{instr.rs1}, r{instr.rs2}"
    if fmt == Format.RRI:
        return f"{name} r{instr.rd}, r{instr.rs1}, {imm}"
    if fmt == Format.RI:
        return f"{name} r{instr.rd}, {imm}"
    if fmt == Format.STORE:
        return f"{name} r{instr.rs2}, {imm}(r{instr.rs1})"
    if fmt == Format.MEM:
        return f"{name} r{instr.rd}, {imm}(r{instr.rs1})"
    if fmt == Format.BRANCH:
        return f"{name} r{instr.rs1}, r{instr.rs2}, {target or f'@{instr.imm}'}"
    if fmt == Format.JUMP:
        return f"{name} {target or f'@{instr.target}'}"
    if fmt == Format.FFF:
        return f"{name} f{instr.fd}, f{instr.fs1}, f{instr.fs2}"
    if fmt == Format.FF:
        return f"{name} f{instr.fd}, f{instr.fs1}"
    if fmt == Format.RFF:
        return f"{name} r{instr.rd}, f{instr.fs1}, f{instr.fs2}"
    if fmt == Format.FR:
        return f"{name} f{instr.fd}, r{instr.rs1}"
    if fmt == Format.RF:
        return f"{name} r{instr.rd}, f{instr.fs1}"
    if fmt == Format.FLOAD:
        return f"{name} f{instr.fd}, {imm}(r{instr.rs1})"
    if fmt == Format.FSTORE:
        return f"{name} f{instr.fs2}, {imm}(r{instr.rs1})"
    if fmt == Format.R:
        return f"{name} r{instr.rd}"
    return name


def branch_target(instr: Instruction, pc: int) -> int | None:
    """Absolute target of a PC-relative branch or JAL, else None."""
    if instr.op_class == OpClass.BRANCH:
        return pc + 4 * instr.imm
    if instr.opcode in OPCODES and OPCODES[instr.opcode].fmt == Format.JUMP:
        return pc + 4 * instr.target
    return None


def disassemble(program: Program) -> str:
    """Render a Program so that assembling the text gives back the same words."""
    labels: dict[int, str] = {}
    for name, addr in sorted(program.entry_points.items(), key=lambda kv: (kv[1], kv[0])):
        labels.setdefault(addr, name)
    decoded = []
    for index, word in enumerate(program.words):
        pc = program.base_address + 4 * index
        instr = decode(word)
        decoded.append((pc, instr))
        target = branch_target(instr, pc)
        if target is not None and program.contains(target):
            labels.setdefault(target, f"L_{target:08x}")

    lines = [f".org {program.base_address:#x}"]
    lines.extend(f".global {name}" for name in sorted(program.entry_points))
    for pc, instr in decoded:
        for name, addr in sorted(program.entry_points.items()):
            if addr == pc and labels.get(pc) != name:
                lines.append(f"{name}:")
        if pc in labels:
            lines.append(f"{labels[pc]}:")
        target = branch_target(instr, pc)
        label = labels.get(target) if target is not None else None
        lines.append(f"    {format_instruction(instr, label)}")
    return "\n".join(lines) + "\n"
