"""Two-pass assembler, disassembler and the source builder."""

import struct

import pytest

from twinsim.asm import AsmBuilder, AsmErrorKind, AssemblyError, assemble, disassemble
from twinsim.isa import Opcode, decode
from twinsim.workloads import SUITE, build


def _kinds(source: str) -> list[tuple[int, AsmErrorKind]]:
    with pytest.raises(AssemblyError) as info:
        assemble(source)
    return [(e.line, e.kind) for e in info.value.errors]


class TestAssemble:
    def test_nop_halt(self):
        program = assemble("nop\nhalt\n")
        assert program.base_address == 0
        assert [decode(w).opcode for w in program.words] == [Opcode.NOP, Opcode.HALT]

    def test_org_labels_and_globals(self):
        program = assemble(
            """
            .org 0x1000
            .global main
            main:
                addi r1, r0, 1   ; comment
            loop: bne r1, r0, loop  # another comment
                halt
            """
        )
        assert program.base_address == 0x1000
        assert program.entry_points == {"main": 0x1000}
        assert program.symbols["loop"] == 0x1004
        branch = decode(program.words[1])
        assert branch.opcode is Opcode.BNE
        assert branch.imm == 0

    def test_branch_offsets_are_pc_relative(self):
        program = assemble("top: nop\nnop\nbeq r0, r0, top\n")
        assert decode(program.words[2]).imm == -2

    def test_li_small_is_one_word(self):
        program = assemble("li r1, 5\n")
        assert len(program.words) == 1
        instr = decode(program.words[0])
        assert (instr.opcode, instr.rd, instr.imm) == (Opcode.ADDI, 1, 5)

    def test_li_large_is_lui_ori(self):
        program = assemble("li r1, 0x12345678\n")
        hi, lo = (decode(w) for w in program.words)
        assert hi.opcode is Opcode.LUI and hi.imm == 0x1234
        assert lo.opcode is Opcode.ORI and lo.imm & 0xFFFF == 0x5678

    def test_pseudo_sizes(self):
        program = assemble("la r1, end\nmv r2, r1\nj end\ncall end\nret\nend: halt\n")
        assert program.symbols["end"] == 4 * 6

    def test_double_directive(self):
        program = assemble(".double 1.5\n")
        assert program.words == struct.unpack("<II", struct.pack("<d", 1.5))

    def test_align_pads_with_zero(self):
        program = assemble("nop\n.align 16\nhalt\n")
        assert len(program.words) == 5
        assert program.words[1:4] == (0, 0, 0)

    def test_register_aliases(self):
        instr = decode(assemble("jalr zero, ra, 0\n").words[0])
        assert (instr.rd, instr.rs1) == (0, 31)


class TestErrors:
    def test_undefined_label_reports_line(self):
        assert _kinds(".org 0\nnop\nbeq r1, r2, nowhere\n") == [(3, AsmErrorKind.UNDEFINED_LABEL)]

    def test_all_errors_reported_in_line_order(self):
        kinds = _kinds("foo r1\nadd r1, r2\nbeq r0, r0, missing\n")
        assert kinds == [
            (1, AsmErrorKind.UNKNOWN_MNEMONIC),
            (2, AsmErrorKind.OPERAND_COUNT),
            (3, AsmErrorKind.UNDEFINED_LABEL),
        ]

    def test_duplicate_label(self):
        assert _kinds("a: nop\na: nop\n") == [(2, AsmErrorKind.DUPLICATE_LABEL)]

    def test_immediate_range(self):
        assert _kinds("addi r1, r0, 40000\n") == [(1, AsmErrorKind.IMMEDIATE_RANGE)]

    def test_bad_register(self):
        assert _kinds("add r1, r2, r40\n") == [(1, AsmErrorKind.BAD_OPERAND)]

    def test_unknown_directive(self):
        assert _kinds(".bogus 1\n") == [(1, AsmErrorKind.BAD_DIRECTIVE)]

    def test_message_format(self):
        with pytest.raises(AssemblyError) as info:
            assemble("nop\nfrobnicate\n")
        assert str(info.value.errors[0]).startswith("line 2: UnknownMnemonic:")

    def test_global_of_missing_label(self):
        assert _kinds(".global main\nnop\n") == [(1, AsmErrorKind.UNDEFINED_LABEL)]


class TestDisassemble:
    def test_illegal_word_becomes_data(self):
        program = assemble(".word 0\nhalt\n")
        assert ".word 0x00000000" in disassemble(program)

    @pytest.mark.parametrize("name", SUITE)
    def test_workload_text_reassembles(self, name):
        program = build(name, quick=True).program
        again = assemble(disassemble(program))
        assert again.base_address == program.base_address
        assert again.words == program.words
        assert again.entry_points == program.entry_points


class TestBuilder:
    def test_unique_labels(self):
        b = AsmBuilder()
        assert b.unique("loop") != b.unique("loop")

    def test_ops_keeps_labels_unindented(self):
        b = AsmBuilder()
        b.ops(
            """
            top:
            addi r1, r1, 1
            bne r1, r0, top
            """
        )
        lines = b.source().splitlines()
        assert lines[0] == "top:"
        assert lines[1].startswith("    addi")
        assert len(b) == 3
