"""Per-thread instruction buffer."""

from __future__ import annotations

IBUF_ENTRIES = 128
_INDEX_MASK = IBUF_ENTRIES - 1
_TAG_SHIFT = 9  # 2 offset bits + 7 index bits


class InstrBuffer:
    """Direct-mapped 128-word store of recently fetched instructions.

    Indexed by word address bits; never invalidated.
    """

    def __init__(self) -> None:
        self.tags = [-1] * IBUF_ENTRIES
        self.words = [0] * IBUF_ENTRIES

    def lookup(self, addr: int) -> int | None:
        index = (addr >> 2) & _INDEX_MASK
        if self.tags[index] == addr >> _TAG_SHIFT:
            return self.words[index]
        return None

    def fill(self, addr: int, word: int) -> None:
        index = (addr >> 2) & _INDEX_MASK
        self.tags[index] = addr >> _TAG_SHIFT
        self.words[index] = word

    def fill_pair(self, addr: int, pair: int) -> None:
        """Install both words of an 8-byte fetch group, low word first."""
        self.fill(addr, pair & 0xFFFFFFFF)
        self.fill(addr + 4, pair >> 32)

    def contains(self, addr: int) -> bool:
        return self.lookup(addr & ~3) is not None

    @property
    def valid_entries(self) -> int:
        return sum(tag >= 0 for tag in self.tags)
