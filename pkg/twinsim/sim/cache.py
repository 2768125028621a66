"""Set-associative L1 cache with NMRU replacement."""

from __future__ import annotations

from collections.abc import Sequence

from ..config import CacheConfig


def nmru_victim(valid: Sequence[bool], mru_way: int) -> int:
    """Way to replace in one set.

    The first invalid way if there is one; otherwise the lowest way that is
    not the most recently used. Direct-mapped sets always give way 0.
    """
    for way, is_valid in enumerate(valid):
        if not is_valid:
            return way
    if len(valid) == 1:
        return 0
    return 1 if mru_way == 0 else 0


class Cache:
    """Tags, line copies and MRU bits; timing lives in the memory unit."""

    def __init__(self, config: CacheConfig, name: str = "cache"):
        self.config = config
        self.name = name
        self.line_bytes = config.line_bytes
        self.num_sets = config.num_sets
        self.ways = config.associativity
        self._offset_bits = self.line_bytes.bit_length() - 1
        self._set_mask = self.num_sets - 1
        self._index_bits = self.num_sets.bit_length() - 1
        # tag -1 marks an invalid way
        self.tags: list[list[int]] = [[-1] * self.ways for _ in range(self.num_sets)]
        self.lines: list[list[bytearray]] = [
            [bytearray(self.line_bytes) for _ in range(self.ways)] for _ in range(self.num_sets)
        ]
        self.mru: list[int] = [0] * self.num_sets
        self.accesses = 0
        self.hits = 0
        self.fills = 0

    def split(self, addr: int) -> tuple[int, int, int]:
        """(set index, tag, byte offset) of an address."""
        line = addr >> self._offset_bits
        return line & self._set_mask, line >> self._index_bits, addr & (self.line_bytes - 1)

    def line_base(self, addr: int) -> int:
        return addr & ~(self.line_bytes - 1)

    def lookup(self, addr: int) -> int | None:
        """Way holding ``addr``, without touching replacement state."""
        index, tag, _ = self.split(addr)
        try:
            return self.tags[index].index(tag)
        except ValueError:
            return None

    def probe(self, addr: int) -> bool:
        """Count an access and report hit or miss; a hit becomes MRU."""
        self.accesses += 1
        index, tag, _ = self.split(addr)
        tags = self.tags[index]
        if tag in tags:
            self.hits += 1
            self.mru[index] = tags.index(tag)
            return True
        return False

    def fill(self, addr: int, data: bytes) -> int:
        """Install the line containing ``addr``; the filled way becomes MRU."""
        index, tag, _ = self.split(addr)
        tags = self.tags[index]
        way = nmru_victim([t >= 0 for t in tags], self.mru[index])
        tags[way] = tag
        self.lines[index][way][:] = data
        self.mru[index] = way
        self.fills += 1
        return way

    def read(self, addr: int, width: int) -> int:
        index, tag, offset = self.split(addr)
        way = self.tags[index].index(tag)
        return int.from_bytes(self.lines[index][way][offset : offset + width], "little")

    def write(self, addr: int, width: int, value: int) -> bool:
        """Update a resident copy; returns False when the line is absent."""
        index, tag, offset = self.split(addr)
        tags = self.tags[index]
        if tag not in tags:
            return False
        line = self.lines[index][tags.index(tag)]
        line[offset : offset + width] = (value & ((1 << (8 * width)) - 1)).to_bytes(width, "little")
        return True

    def write_bytes(self, addr: int, data: bytes) -> None:
        """Patch every resident line overlapping ``[addr, addr + len(data))``."""
        end = addr + len(data)
        base = self.line_base(addr)
        while base < end:
            way = self.lookup(base)
            if way is not None:
                index, _, _ = self.split(base)
                lo, hi = max(addr, base), min(end, base + self.line_bytes)
                self.lines[index][way][lo - base : hi - base] = data[lo - addr : hi - addr]
            base += self.line_bytes

    def invalidate(self) -> None:
        for index in range(self.num_sets):
            self.tags[index] = [-1] * self.ways
            self.mru[index] = 0

    def resident_lines(self):
        """Yield (line base address, line bytes) for every valid way."""
        for index, tags in enumerate(self.tags):
            for way, tag in enumerate(tags):
                if tag >= 0:
                    base = ((tag << self._index_bits) | index) << self._offset_bits
                    yield base, bytes(self.lines[index][way])
