"""Program images and the flat binary image format."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

IMAGE_MAGIC = b"AJTL"
_HEADER = struct.Struct("<4sI")


class ImageFormatError(ValueError):
    """A binary image is truncated or carries the wrong magic."""


@dataclass(frozen=True)
class Program:
    """A contiguous run of words starting at ``base_address``.

    ``entry_points`` holds the labels exported with ``.global``; ``symbols``
    holds every label the assembler saw.
    """

    base_address: int
    words: tuple[int, ...]
    entry_points: dict[str, int] = field(default_factory=dict)
    symbols: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.base_address % 4:
            raise ValueError(f"base address {self.base_address:#x} is not word aligned")
        for label, addr in self.entry_points.items():
            if not self.contains(addr):
                raise ValueError(f"entry {label} at {addr:#x} lies outside the image")

    @property
    def end_address(self) -> int:
        return self.base_address + 4 * len(self.words)

    def contains(self, addr: int) -> bool:
        return self.base_address <= addr < self.end_address

    def word_at(self, addr: int) -> int:
        return self.words[(addr - self.base_address) // 4]

    def address_of(self, label: str) -> int:
        """Address of any label, exported or not."""
        if label in self.entry_points:
            return self.entry_points[label]
        try:
            return self.symbols[label]
        except KeyError:
            raise KeyError(f"unknown label: {label}") from None

    def to_bytes(self) -> bytes:
        """Little-endian words without the image header."""
        return struct.pack(f"<{len(self.words)}I", *self.words)


def write_image(program: Program) -> bytes:
    """Serialize to the binary image format: magic, base address, words."""
    return _HEADER.pack(IMAGE_MAGIC, program.base_address) + program.to_bytes()


def read_image(data: bytes) -> Program:
    if len(data) < _HEADER.size:
        raise ImageFormatError("image shorter than its 8-byte header")
    magic, base = _HEADER.unpack_from(data)
    if magic != IMAGE_MAGIC:
        raise ImageFormatError(f"bad magic {magic!r}, expected {IMAGE_MAGIC!r}")
    body = data[_HEADER.size :]
    if len(body) % 4:
        raise ImageFormatError("image body is not a whole number of words")
    words = struct.unpack(f"<{len(body) // 4}I", body)
    return Program(base_address=base, words=tuple(words))
