"""Memory unit: arbitration, blocking misses, TAS and coherence."""

import random

import pytest

from twinsim.config import CacheConfig
from twinsim.sim import (
    AccessKind,
    Arbiter,
    BusFault,
    GrantStatus,
    MemoryUnit,
    MemRequest,
    SimulatorBug,
)

DATA = 0x0010_0000
PENALTY = 30


def _unit(blocking: str = "unified") -> MemoryUnit:
    return MemoryUnit(CacheConfig(), CacheConfig(), blocking=blocking)


def _load(tid: int, addr: int) -> MemRequest:
    return MemRequest(tid, AccessKind.LOAD, addr, 4)


class TestArbiter:
    def test_single_requester_always_wins(self):
        arbiter = Arbiter()
        assert [arbiter.grant((False, True)) for _ in range(5)] == [1] * 5

    def test_thread0_wins_first_contest(self):
        assert Arbiter().grant((True, True)) == 0

    def test_alternates_under_contention(self):
        arbiter = Arbiter()
        winners = [arbiter.grant((True, True)) for _ in range(10)]
        assert winners == [0, 1] * 5

    def test_no_requests(self):
        assert Arbiter().grant((False, False)) is None

    def test_saturated_share_stays_balanced(self):
        rng = random.Random(3)
        arbiter = Arbiter()
        contested = [0, 0]
        for _ in range(10_000):
            requests = (rng.random() < 0.9, rng.random() < 0.9)
            winner = arbiter.grant(requests)
            if all(requests):
                contested[winner] += 1
        assert abs(contested[0] - contested[1]) <= contested[0] // 10 + 1

    def test_both_requesting_every_cycle_imbalance_at_most_one(self):
        arbiter = Arbiter()
        for _ in range(1000):
            arbiter.grant((True, True))
            assert abs(arbiter.grants[0] - arbiter.grants[1]) <= 1


class TestTiming:
    def test_cold_load_misses(self):
        mem = _unit()
        resp = mem.access(_load(0, DATA), 5)
        assert not resp.hit
        assert resp.done_at == 5 + PENALTY

    def test_warm_load_hits(self):
        mem = _unit()
        mem.access(_load(0, DATA), 0)
        resp = mem.access(_load(0, DATA + 8), 40)
        assert resp.hit
        assert resp.done_at == 40

    def test_penalty_follows_config(self):
        mem = MemoryUnit(CacheConfig(), CacheConfig(miss_penalty_cycles=60))
        assert mem.access(_load(0, DATA), 0).done_at == 60

    def test_miss_blocks_other_thread_fetch_when_unified(self):
        mem = _unit()
        mem.access(_load(0, DATA), 10)
        fetch = MemRequest(1, AccessKind.IFETCH, 0x1000, 8)
        grants = mem.arbitrate({1: fetch}, 11)
        assert grants[1].status is GrantStatus.BUSY
        assert grants[1].until == 10 + PENALTY

    def test_per_cache_blocking_lets_fetch_through(self):
        mem = _unit("per_cache")
        mem.access(_load(0, DATA), 10)
        fetch = MemRequest(1, AccessKind.IFETCH, 0x1000, 8)
        assert mem.arbitrate({1: fetch}, 11)[1].granted
        assert mem.arbitrate({0: _load(0, DATA + 64)}, 11)[0].status is GrantStatus.BUSY

    def test_port_frees_when_miss_completes(self):
        mem = _unit()
        mem.access(_load(0, DATA), 0)
        assert mem.arbitrate({1: _load(1, DATA + 64)}, PENALTY)[1].granted

    def test_contention_same_cycle(self):
        mem = _unit()
        grants = mem.arbitrate({0: _load(0, DATA), 1: _load(1, DATA + 4)}, 0)
        assert grants[0].granted
        assert grants[1].status is GrantStatus.LOST

    def test_never_grants_during_a_miss(self):
        rng = random.Random(5)
        mem = _unit()
        for now in range(10_000):
            busy = mem.in_flight(now)
            requests = {
                tid: _load(tid, DATA + 4 * rng.randrange(4096))
                for tid in (0, 1)
                if rng.random() < 0.5
            }
            if not requests:
                continue
            grants = mem.arbitrate(requests, now)
            winners = [tid for tid, g in grants.items() if g.granted]
            assert len(winners) <= 1
            if busy:
                assert not winners
            for tid in winners:
                mem.access(requests[tid], now)
        assert mem.grants == mem.responses


class TestTestAndSet:
    def test_acquire_free_byte(self):
        mem = _unit()
        resp = mem.access(MemRequest(0, AccessKind.TAS, DATA, 1), 0)
        assert resp.data == 0
        assert mem.read_bytes(DATA, 1) == b"\x01"
        assert mem.lock_holder == 0

    def test_held_byte_unchanged(self):
        mem = _unit()
        mem.write_bytes(DATA, b"\x01")
        resp = mem.access(MemRequest(0, AccessKind.TAS, DATA, 1), 0)
        assert resp.data == 1
        assert mem.read_bytes(DATA, 1) == b"\x01"

    def test_takes_an_extra_cycle(self):
        mem = _unit()
        cold = mem.access(MemRequest(0, AccessKind.TAS, DATA, 1), 0)
        assert cold.done_at == PENALTY + 1
        warm = mem.access(MemRequest(0, AccessKind.TAS, DATA, 1), 100)
        assert warm.done_at == 101

    def test_other_thread_locked_out_until_release(self):
        mem = _unit()
        resp = mem.access(MemRequest(0, AccessKind.TAS, DATA, 1), 0)
        release = resp.done_at + 1
        assert mem.arbitrate({1: _load(1, DATA)}, resp.done_at)[1].status is GrantStatus.LOCKED
        assert mem.arbitrate({1: _load(1, DATA)}, release)[1].granted
        assert mem.lock_holder is None

    def test_unlock_by_non_holder_is_a_bug(self):
        mem = _unit()
        mem.lock(0)
        with pytest.raises(SimulatorBug):
            mem.unlock(1)


class TestCoherence:
    def test_store_visible_to_other_thread_next_cycle(self):
        mem = _unit()
        mem.access(_load(1, DATA), 0)
        mem.access(MemRequest(0, AccessKind.STORE, DATA, 4, 0x55), 31)
        assert mem.access(_load(1, DATA), 32).data == 0x55

    def test_store_updates_icache_copy(self):
        mem = _unit()
        mem.access(MemRequest(0, AccessKind.IFETCH, 0x1000, 8), 0)
        mem.access(MemRequest(0, AccessKind.STORE, 0x1000, 4, 0x1234), 31)
        assert mem.icache.read(0x1000, 4) == 0x1234

    def test_random_traffic_stays_coherent(self):
        rng = random.Random(9)
        mem = _unit()
        for now in range(10_000):
            addr = DATA + 4 * rng.randrange(8192)
            kind = rng.choice([AccessKind.LOAD, AccessKind.STORE, AccessKind.IFETCH])
            if kind is AccessKind.IFETCH:
                req = MemRequest(rng.randrange(2), kind, addr & ~7, 8)
            else:
                req = MemRequest(rng.randrange(2), kind, addr, 4, rng.getrandbits(32))
            mem.access(req, now)
        assert mem.check_coherence() == []
        assert mem.grants == mem.responses

    def test_load_observer_sees_granted_loads(self):
        mem = _unit()
        seen = []
        mem.add_load_observer(lambda tid, addr, width, value, cycle: seen.append((tid, addr, cycle)))
        mem.access(_load(1, DATA), 7)
        mem.access(MemRequest(0, AccessKind.STORE, DATA, 4, 1), 50)
        assert seen == [(1, DATA, 7)]


class TestBusFault:
    def test_unmapped(self):
        with pytest.raises(BusFault):
            _unit().access(_load(0, 0xFFFF_FFF0), 0)

    def test_misaligned(self):
        with pytest.raises(BusFault):
            _unit().access(_load(0, DATA + 2), 0)
