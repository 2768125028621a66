"""Side-kick channel layout, protocol probe, code generators and round trips."""

import pytest

from twinsim.asm import AsmBuilder, assemble
from twinsim.config import SimConfig
from twinsim.sidekick import (
    ERROR_SENTINEL,
    ChannelError,
    ChannelLayout,
    ChannelProbe,
    ChannelStatus,
    TaskTable,
    build_roundtrip_program,
    emit_dispatcher,
    emit_invoke,
    measure_roundtrip,
    run_roundtrip,
)

BASE = 0x000F_0000


class TestLayout:
    def test_offsets(self):
        layout = ChannelLayout(BASE)
        assert layout.status_addr == BASE
        assert layout.fn_id_addr == BASE + 4
        assert layout.arg_offset(0) == 8
        assert layout.arg_offset(7) == 36
        assert layout.retval_offset(1) == 44

    def test_field_names(self):
        layout = ChannelLayout(BASE)
        assert [layout.field_of(BASE + off) for off in (0, 4, 8, 36, 40, 44, 48)] == [
            "status",
            "fn_id",
            "args",
            "args",
            "retval",
            "retval",
            "pad",
        ]

    def test_unaligned_base(self):
        with pytest.raises(ChannelError):
            ChannelLayout(BASE + 32)

    @pytest.mark.parametrize("index", [-1, 8])
    def test_arg_slot_range(self, index):
        with pytest.raises(ChannelError):
            ChannelLayout(BASE).arg_offset(index)


class TestTaskTable:
    def test_ids_start_at_one(self):
        table = TaskTable.of(["a", "b"])
        assert table.fn_id("a") == 1
        assert table.fn_id("b") == 2
        assert len(table) == 2

    def test_unknown_label(self):
        with pytest.raises(ChannelError):
            TaskTable.of(["a"]).fn_id("z")

    def test_duplicates(self):
        with pytest.raises(ChannelError):
            TaskTable.of(["a", "a"])


class TestProbe:
    def _probe(self) -> ChannelProbe:
        return ChannelProbe(ChannelLayout(BASE))

    def test_full_cycle_is_clean(self):
        probe = self._probe()
        probe(0, BASE + 8, 4, 7, 10)
        probe(0, BASE + 4, 4, 1, 11)
        probe(0, BASE, 4, ChannelStatus.REQUEST, 12)
        probe(1, BASE, 4, ChannelStatus.BUSY, 20)
        probe(1, BASE + 40, 4, 99, 25)
        probe(1, BASE, 4, ChannelStatus.DONE, 26)
        probe(0, BASE, 4, ChannelStatus.IDLE, 30)
        assert probe.violations == []
        assert probe.requests == 1
        assert probe.visible_at[ChannelStatus.REQUEST] == [13]
        assert probe.status is ChannelStatus.IDLE

    def test_wrong_thread_transition(self):
        probe = self._probe()
        probe(1, BASE, 4, ChannelStatus.REQUEST, 5)
        assert "owned by thread 0" in probe.violations[0]

    def test_skipped_state(self):
        probe = self._probe()
        probe(0, BASE, 4, ChannelStatus.DONE, 5)
        assert "IDLE -> DONE" in probe.violations[0]

    def test_args_written_while_busy(self):
        probe = self._probe()
        probe(0, BASE, 4, ChannelStatus.REQUEST, 1)
        probe(0, BASE + 8, 4, 3, 2)
        assert "args while status is REQUEST" in probe.violations[0]

    def test_retval_from_thread0(self):
        probe = self._probe()
        probe(0, BASE + 40, 4, 3, 2)
        assert probe.violations

    def test_ignores_other_addresses(self):
        probe = self._probe()
        probe(1, BASE + 64, 4, 3, 2)
        assert probe.violations == []


class TestCodegen:
    def test_dispatcher_needs_tasks(self):
        with pytest.raises(ChannelError):
            emit_dispatcher(AsmBuilder(), TaskTable.of([]), ChannelLayout(BASE))

    def test_invoke_argument_limit(self):
        with pytest.raises(ChannelError):
            emit_invoke(AsmBuilder(), 1, list(range(9)), ChannelLayout(BASE))

    def test_invoke_negative_fn_id(self):
        with pytest.raises(ChannelError):
            emit_invoke(AsmBuilder(), -1, [], ChannelLayout(BASE))

    def test_invoke_stores_status_last(self):
        b = AsmBuilder()
        emit_invoke(b, 2, ["r7", 5], ChannelLayout(BASE))
        program = assemble(b.source())
        stores = [line for line in b.source().splitlines() if line.strip().startswith("sw")]
        assert stores[-1].strip() == "sw r25, 0(r26)"
        assert stores[0].strip() == "sw r7, 8(r26)"
        assert len(program.words) > len(stores)


class TestRoundTrip:
    def test_constant_and_lock_free(self):
        rt = measure_roundtrip(reps=1000)
        assert len(rt.samples) == 1000
        assert rt.constant
        assert rt.max < 100
        assert rt.violations == ()
        assert rt.atomic_ops == 0

    def test_argument_values_do_not_change_timing(self):
        a = measure_roundtrip(reps=20, args=(1, 2), fn_id=0)
        b = measure_roundtrip(reps=20, args=(700, 9000), fn_id=0)
        assert a.samples == b.samples

    def test_overlap_hides_dispatch(self):
        base = measure_roundtrip(reps=50)
        overlapped = measure_roundtrip(reps=50, overlap_ops=40)
        assert overlapped.max <= base.max + 40

    def test_task_work_adds_cycles(self):
        fast = measure_roundtrip(reps=20, fn_id=1)
        slow = measure_roundtrip(reps=20, fn_id=1, task_ops=30)
        assert slow.median > fast.median

    def test_unknown_fn_id_returns_sentinel(self):
        sim = SimConfig()
        result, probe = run_roundtrip(sim, 2, fn_id=5)
        assert result.ok
        assert result.memory.read_word(sim.channel_base + 40) == ERROR_SENTINEL
        assert probe.violations == []
        assert probe.requests == 3

    def test_spinning_dispatcher_stays_in_buffer(self):
        short, _ = run_roundtrip(SimConfig(), 5)
        long, _ = run_roundtrip(SimConfig(), 50)
        assert short.stats.threads[1].icache_accesses == long.stats.threads[1].icache_accesses

    def test_to_dict(self):
        data = measure_roundtrip(reps=5).to_dict()
        assert data["reps"] == 5
        assert data["reference"] == 25
        assert data["min"] <= data["median"] <= data["max"]

    def test_free_running_range_is_reported(self):
        rt = measure_roundtrip(reps=50)
        assert len(rt.free_running) == 50
        assert 0 < rt.free_min <= rt.free_max < 100
        assert rt.to_dict()["free_running"] == {"min": rt.free_min, "max": rt.free_max}

    def test_resync_only_adds_the_cold_miss(self):
        layout = ChannelLayout(SimConfig().channel_base)
        synced = build_roundtrip_program(3, layout)
        free = build_roundtrip_program(3, layout, resync=False)
        assert len(synced.words) == len(free.words) + 2

    def test_zero_reps_rejected(self):
        with pytest.raises(ChannelError):
            measure_roundtrip(reps=0)
