"""Assembler, disassembler and source builder."""

from .assembler import AsmError, AsmErrorKind, Assembler, AssemblyError, assemble
from .builder import AsmBuilder
from .disassembler import disassemble, format_instruction

__all__ = [
    "AsmBuilder",
    "AsmError",
    "AsmErrorKind",
    "Assembler",
    "AssemblyError",
    "assemble",
    "disassemble",
    "format_instruction",
]
