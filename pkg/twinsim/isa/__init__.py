"""AJT-lite instruction set: opcodes, encoding and program images."""

from .encoding import EncodingRangeError, Instruction, decode, encode, illegal, operand_fields
from .opcodes import (
    BY_MNEMONIC,
    MEMORY_CLASSES,
    N_FREGS,
    N_IREGS,
    OPCODES,
    ZERO_EXTENDED,
    Format,
    OpClass,
    Opcode,
    OpInfo,
)
from .program import IMAGE_MAGIC, ImageFormatError, Program, read_image, write_image

__all__ = [
    "BY_MNEMONIC",
    "IMAGE_MAGIC",
    "MEMORY_CLASSES",
    "N_FREGS",
    "N_IREGS",
    "OPCODES",
    "ZERO_EXTENDED",
    "EncodingRangeError",
    "Format",
    "ImageFormatError",
    "Instruction",
    "OpClass",
    "OpInfo",
    "Opcode",
    "Program",
    "decode",
    "encode",
    "illegal",
    "operand_fields",
    "read_image",
    "write_image",
]
