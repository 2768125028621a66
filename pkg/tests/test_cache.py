"""Set-associative caches and NMRU replacement."""

import random

import pytest

from twinsim.config import CacheConfig
from twinsim.sim import Cache, nmru_victim


class _ReferenceCache:
    """Dictionary model of the same geometry and replacement rule."""

    def __init__(self, sets: int, ways: int):
        self.sets = [[None] * ways for _ in range(sets)]
        self.mru = [0] * sets
        self.n_sets = sets

    def access(self, addr: int) -> bool:
        line = addr // 64
        index, tag = line % self.n_sets, line // self.n_sets
        ways = self.sets[index]
        if tag in ways:
            self.mru[index] = ways.index(tag)
            return True
        if None in ways:
            victim = ways.index(None)
        elif len(ways) == 1:
            victim = 0
        else:
            victim = 1 if self.mru[index] == 0 else 0
        ways[victim] = tag
        self.mru[index] = victim
        return False


def _access(cache: Cache, addr: int) -> bool:
    hit = cache.probe(addr)
    if not hit:
        cache.fill(addr, bytes(cache.line_bytes))
    return hit


class TestNmruVictim:
    def test_direct_mapped(self):
        assert nmru_victim([True], 0) == 0

    def test_first_invalid_way(self):
        assert nmru_victim([True, False, True, False], 0) == 1

    def test_lowest_non_mru(self):
        assert nmru_victim([True] * 4, 0) == 1
        assert nmru_victim([True] * 4, 2) == 0
        assert nmru_victim([True] * 4, 3) == 0

    def test_never_the_mru_way(self):
        rng = random.Random(1)
        for _ in range(10_000):
            ways = rng.choice([2, 4, 8])
            mru = rng.randrange(ways)
            assert nmru_victim([True] * ways, mru) != mru


class TestCache:
    def test_geometry(self):
        cache = Cache(CacheConfig())
        assert cache.num_sets == 128
        assert cache.ways == 4

    def test_hit_after_fill(self):
        cache = Cache(CacheConfig())
        assert not _access(cache, 0x4000)
        assert _access(cache, 0x4004)
        assert _access(cache, 0x403C)
        assert not _access(cache, 0x4040)

    @pytest.mark.parametrize("assoc", [1, 2, 4, 8])
    def test_matches_reference_model(self, assoc):
        config = CacheConfig(size_bytes=4096, associativity=assoc)
        cache = Cache(config)
        model = _ReferenceCache(config.num_sets, assoc)
        rng = random.Random(assoc)
        for _ in range(10_000):
            addr = rng.randrange(0, 64 * 1024, 4)
            assert _access(cache, addr) == model.access(addr)

    def test_filled_way_is_mru(self):
        cache = Cache(CacheConfig(size_bytes=4096, associativity=4))
        stride = 4096 // 4  # same set every time
        for i in range(6):
            _access(cache, i * stride)
            index, _, _ = cache.split(i * stride)
            assert cache.tags[index][cache.mru[index]] == cache.split(i * stride)[1]

    def test_write_only_updates_resident_lines(self):
        cache = Cache(CacheConfig())
        assert not cache.write(0x100, 4, 7)
        _access(cache, 0x100)
        assert cache.write(0x100, 4, 0xAABBCCDD)
        assert cache.read(0x100, 4) == 0xAABBCCDD
        assert cache.read(0x102, 1) == 0xBB

    def test_invalidate(self):
        cache = Cache(CacheConfig())
        _access(cache, 0)
        cache.invalidate()
        assert cache.lookup(0) is None
        assert list(cache.resident_lines()) == []
