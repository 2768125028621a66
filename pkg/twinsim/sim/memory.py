"""Sparse flat backing memory."""

from __future__ import annotations

import struct

PAGE_BITS = 12
PAGE_SIZE = 1 << PAGE_BITS
_DOUBLE = struct.Struct("<d")


class BusFault(Exception):
    """Access to an unmapped or misaligned address."""

    def __init__(self, addr: int, reason: str = "unmapped"):
        self.addr = addr
        self.reason = reason
        super().__init__(f"{reason} access at {addr:#010x}")


class BackingMemory:
    """Byte-addressed little-endian memory over ``[0, size_bytes)``.

    Pages are allocated on first write; untouched memory reads as zero.
    """

    def __init__(self, size_bytes: int):
        self.size_bytes = size_bytes
        self._pages: dict[int, bytearray] = {}

    def is_mapped(self, addr: int, width: int = 1) -> bool:
        return 0 <= addr and addr + width <= self.size_bytes

    def check(self, addr: int, width: int) -> None:
        if not self.is_mapped(addr, width):
            raise BusFault(addr, "unmapped")
        if addr % width:
            raise BusFault(addr, "misaligned")

    def _page(self, number: int) -> bytearray:
        page = self._pages.get(number)
        if page is None:
            page = self._pages[number] = bytearray(PAGE_SIZE)
        return page

    def read_bytes(self, addr: int, length: int) -> bytes:
        if not self.is_mapped(addr, length):
            raise BusFault(addr)
        out = bytearray()
        while length:
            number, offset = divmod(addr, PAGE_SIZE)
            chunk = min(length, PAGE_SIZE - offset)
            page = self._pages.get(number)
            out += page[offset : offset + chunk] if page is not None else bytes(chunk)
            addr += chunk
            length -= chunk
        return bytes(out)

    def write_bytes(self, addr: int, data: bytes) -> None:
        if not self.is_mapped(addr, len(data)):
            raise BusFault(addr)
        view = memoryview(data)
        while view:
            number, offset = divmod(addr, PAGE_SIZE)
            chunk = min(len(view), PAGE_SIZE - offset)
            self._page(number)[offset : offset + chunk] = view[:chunk]
            addr += chunk
            view = view[chunk:]

    def read(self, addr: int, width: int) -> int:
        """Unsigned little-endian value; ``width`` never crosses a page when aligned."""
        number, offset = divmod(addr, PAGE_SIZE)
        page = self._pages.get(number)
        if page is None or offset + width > PAGE_SIZE:
            return int.from_bytes(self.read_bytes(addr, width), "little")
        return int.from_bytes(page[offset : offset + width], "little")

    def write(self, addr: int, width: int, value: int) -> None:
        self.write_bytes(addr, (value & ((1 << (8 * width)) - 1)).to_bytes(width, "little"))

    def read_word(self, addr: int) -> int:
        return self.read(addr, 4)

    def write_word(self, addr: int, value: int) -> None:
        self.write(addr, 4, value)

    def read_double(self, addr: int) -> float:
        return _DOUBLE.unpack(self.read_bytes(addr, 8))[0]

    def write_double(self, addr: int, value: float) -> None:
        self.write_bytes(addr, _DOUBLE.pack(value))

    @property
    def pages_touched(self) -> int:
        return len(self._pages)
