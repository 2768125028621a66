"""Instruction encoding, decoding and binary images."""

import random

import pytest

from twinsim.isa import (
    IMAGE_MAGIC,
    N_FREGS,
    N_IREGS,
    OPCODES,
    EncodingRangeError,
    ImageFormatError,
    Instruction,
    Opcode,
    Program,
    decode,
    encode,
    operand_fields,
    read_image,
    write_image,
)


def _random_instruction(rng: random.Random, opcode: Opcode) -> Instruction:
    fields = {}
    for name in operand_fields(OPCODES[opcode].fmt):
        if name in ("rd", "rs1", "rs2"):
            fields[name] = rng.randrange(N_IREGS)
        elif name in ("fd", "fs1", "fs2"):
            fields[name] = rng.randrange(N_FREGS)
        elif name == "imm":
            fields[name] = rng.randint(-(1 << 15), (1 << 15) - 1)
        else:
            fields[name] = rng.randint(-(1 << 25), (1 << 25) - 1)
    return Instruction(opcode, **fields)


class TestEncode:
    def test_nop_is_bare_opcode(self):
        assert encode(Instruction(Opcode.NOP)) == int(Opcode.NOP) << 26

    def test_addi_fields(self):
        word = encode(Instruction(Opcode.ADDI, rd=3, rs1=4, imm=-1))
        assert word >> 26 == Opcode.ADDI
        assert (word >> 21) & 0x1F == 3
        assert (word >> 16) & 0x1F == 4
        assert word & 0xFFFF == 0xFFFF

    def test_immediate_out_of_range(self):
        with pytest.raises(EncodingRangeError):
            encode(Instruction(Opcode.ADDI, rd=1, imm=40000))

    def test_fp_register_out_of_range(self):
        with pytest.raises(EncodingRangeError):
            encode(Instruction(Opcode.FADD, fd=16, fs1=0, fs2=0))

    def test_field_not_in_format(self):
        with pytest.raises(EncodingRangeError):
            encode(Instruction(Opcode.HALT, rd=1))


class TestDecode:
    def test_zero_word_is_illegal(self):
        instr = decode(0)
        assert instr.is_illegal
        assert instr.raw == 0

    def test_unassigned_opcode_is_illegal(self):
        word = 63 << 26 | 0x1234
        instr = decode(word)
        assert instr.is_illegal
        assert encode(instr) == word

    def test_nonzero_padding_is_illegal(self):
        assert decode(int(Opcode.HALT) << 26 | 1).is_illegal

    def test_every_opcode_round_trips(self):
        rng = random.Random(11)
        for opcode in OPCODES:
            for _ in range(50):
                instr = _random_instruction(rng, opcode)
                assert decode(encode(instr)) == instr, instr

    def test_decode_is_total(self):
        rng = random.Random(12)
        for _ in range(20_000):
            word = rng.getrandbits(32)
            instr = decode(word)
            assert encode(instr) == word


class TestImage:
    def test_header(self):
        program = Program(0x1000, (int(Opcode.HALT) << 26,))
        blob = write_image(program)
        assert blob[:4] == IMAGE_MAGIC
        assert int.from_bytes(blob[4:8], "little") == 0x1000
        assert read_image(blob).words == program.words

    def test_bad_magic(self):
        with pytest.raises(ImageFormatError):
            read_image(b"NOPE" + bytes(8))

    def test_truncated_body(self):
        blob = write_image(Program(0, (1, 2)))
        with pytest.raises(ImageFormatError):
            read_image(blob[:-1])

    def test_unaligned_base_rejected(self):
        with pytest.raises(ValueError):
            Program(2, ())
