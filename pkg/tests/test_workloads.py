"""Benchmark workloads against their host oracles in every scenario."""

import re

import numpy as np
import pytest

from twinsim.config import SimConfig
from twinsim.sidekick import DISPATCH_LABEL
from twinsim.sim import Scenario, StallCause
from twinsim.workloads import (
    REGISTRY,
    SUITE,
    OracleFailure,
    WorkloadError,
    build,
    parse_sizes,
    run_workload,
)
from twinsim.workloads.base import DataImage, KernelProgram, Workload, read_doubles, read_words
from twinsim.workloads.bellman_ford import INF, build_bellman_ford
from twinsim.workloads.daxpy import build_daxpy
from twinsim.workloads.fft import (
    FftBuffer,
    FftPlan,
    build_fft,
    direct_dft,
    emit_fft_routines,
    read_spectrum,
    stage_steps,
)
from twinsim.workloads.mergesort import build_merge_sort
from twinsim.workloads.mutexes import build_mutexes


def _verified(workload, scenario=Scenario.SINGLE):
    result = run_workload(workload, scenario)
    workload.verify(result)
    assert result.stats.check() == []
    return result


class TestSuite:
    def test_order(self):
        assert SUITE == (
            "matrix_mult",
            "dot_product",
            "fft",
            "merge_sort",
            "bellman_ford",
            "daxpy",
            "mem_copy",
            "mutexes",
            "ecg",
        )

    @pytest.mark.parametrize("scenario", list(Scenario))
    @pytest.mark.parametrize("name", SUITE)
    def test_quick_build_passes_oracle(self, name, scenario):
        _verified(build(name, quick=True), scenario)

    @pytest.mark.parametrize("name", SUITE)
    def test_scenarios_relate(self, name):
        workload = build(name, quick=True)
        runs = {s: run_workload(workload, s) for s in Scenario}
        single, inactive, spinning = runs[Scenario.SINGLE], runs[Scenario.INACTIVE], runs[Scenario.SPINNING]
        assert single.total_cycles == inactive.total_cycles
        assert spinning.total_cycles >= inactive.total_cycles
        retired = {s: runs[s].stats.threads[0].instructions_retired for s in (Scenario.SINGLE, Scenario.INACTIVE, Scenario.SPINNING)}
        assert len(set(retired.values())) == 1
        dual_atomics = sum(t.atomic_ops for t in runs[Scenario.DUAL].stats.threads)
        assert (dual_atomics > 0) == workload.uses_atomics

    @pytest.mark.parametrize("name", SUITE)
    def test_routines_leave_reserved_registers_alone(self, name):
        source = build(name, quick=True).source
        routines = source.split(f"\n{DISPATCH_LABEL}:")[0].rsplit("halt", 1)[1]
        assert re.findall(r"\br(1[6-9]|2\d|30)\b", routines) == []

    def test_same_text_in_every_scenario(self):
        workload = build("daxpy", quick=True)
        entries = {s: workload.entries(s) for s in Scenario}
        assert entries[Scenario.SINGLE] == entries[Scenario.INACTIVE]
        assert entries[Scenario.DUAL][1] == entries[Scenario.SPINNING][1]

    def test_manifest(self):
        manifest = build("merge_sort", quick=True).manifest()
        assert set(manifest) == {
            "name",
            "sizes",
            "partitioning",
            "entries",
            "channel_base",
            "oracle",
            "text",
            "data",
            "regions",
            "notes",
        }
        assert manifest["sizes"] == {"n": 64}
        assert {"main_single", "main_dual", "sk_dispatch"} <= set(manifest["entries"])


class TestBuildParameters:
    def test_parse_sizes(self):
        assert parse_sizes(["n=0x10", "reps = 3"]) == {"n": 16, "reps": 3}

    @pytest.mark.parametrize("item", ["n", "=4", "n=four"])
    def test_parse_sizes_rejects(self, item):
        with pytest.raises(WorkloadError):
            parse_sizes([item])

    def test_unknown_workload(self):
        with pytest.raises(WorkloadError, match="unknown workload"):
            build("raytrace")

    def test_unknown_size(self):
        with pytest.raises(WorkloadError, match="no size"):
            build("daxpy", {"m": 8}, quick=True)

    def test_seed_ignored_where_unused(self):
        assert not REGISTRY["mutexes"].seeded
        assert build("mutexes", {"seed": 9}, quick=True).sizes == {"total": 64}

    def test_seed_changes_data(self):
        a = build("daxpy", {"seed": 1}, quick=True)
        b = build("daxpy", {"seed": 2}, quick=True)
        assert a.data.segments != b.data.segments


class TestDaxpy:
    def test_zero_alpha_leaves_y(self):
        workload = build_daxpy(n=16, alpha=0.0)
        y_addr = workload.data["y"]
        y0 = np.frombuffer(dict(workload.data.segments)[y_addr], dtype="<f8")
        result = _verified(workload)
        np.testing.assert_array_equal(read_doubles(result.memory, y_addr, 16), y0)

    def test_size_must_divide(self):
        with pytest.raises(WorkloadError):
            build_daxpy(n=10)


class TestFft:
    def test_zeros(self):
        workload = build_fft(signal=np.zeros(16))
        result = _verified(workload)
        assert not np.any(read_spectrum(workload, result.memory))

    def test_impulse(self):
        signal = np.zeros(16)
        signal[0] = 1.0
        workload = build_fft(signal=signal)
        result = _verified(workload, Scenario.DUAL)
        np.testing.assert_allclose(read_spectrum(workload, result.memory), np.ones(16))

    def test_unsplit_variant(self):
        _verified(build_fft(n=32, split=False))

    def test_direct_oracle_at_256(self):
        x = np.random.default_rng(1).uniform(-1.0, 1.0, 256)
        np.testing.assert_allclose(direct_dft(x), np.fft.fft(x), atol=1e-9)
        workload = build_fft(n=256)
        assert workload.oracle_id == "direct_dft"
        _verified(workload, Scenario.DUAL)

    def test_blocks_smaller_than_half(self):
        _verified(build_fft(n=128, block=16), Scenario.DUAL)

    def test_not_power_of_two(self):
        with pytest.raises(WorkloadError):
            build_fft(n=12)

    def test_stage_steps(self):
        steps = stage_steps(8)
        np.testing.assert_allclose(steps, [-1.0, -1j, np.exp(-1j * np.pi / 4)], atol=1e-15)

    @pytest.mark.parametrize("n", [16, 4096])
    def test_halves_sit_half_a_way_apart(self, n):
        buf = FftBuffer.place(DataImage(), "buf", n, way_bytes=8192)
        assert buf.odd_offset % 8192 == 4096
        assert buf.odd_offset >= 8 * n

    def test_layout_is_bit_reversed_by_parity(self):
        buf = FftBuffer(8, 0, split=True, odd_offset=256)
        assert list(buf.input_offsets()) == [0, 256, 32, 288, 16, 272, 48, 304]
        assert list(buf.output_offsets()) == [0, 16, 32, 48, 256, 272, 288, 304]

    def test_split_combine_matches_numpy(self):
        x = np.random.default_rng(3).uniform(-1.0, 1.0, 64)
        data = DataImage()
        plan = FftPlan.place(data, 64)
        buf = FftBuffer.place(data, "buf", 64, values=x)
        p = KernelProgram("split_combine", SimConfig())
        emit_fft_routines(p)

        def emit_main(b, dual):
            plan.emit(p, b, buf, dual, split_combine=True)

        program, source = p.build(emit_main)
        workload = Workload(
            name="split_combine",
            sizes={"n": 64},
            partitioning="interleaved",
            program=program,
            source=source,
            data=data,
            channel_base=SimConfig().channel_base,
            oracle_id="numpy_fft",
            check=lambda mem: [],
        )
        result = run_workload(workload, Scenario.DUAL)
        np.testing.assert_allclose(buf.read(result.memory), np.fft.fft(x), atol=1e-12)


class TestBellmanFord:
    def test_chain(self):
        workload = build_bellman_ford(nodes=3, graph=[(0, 1, 3), (1, 2, 4)])
        result = _verified(workload, Scenario.DUAL)
        dist = read_words(result.memory, workload.data["dist"], 9).reshape(3, 3)
        assert dist[0, 2] == 7
        assert dist[2, 0] == INF
        assert list(np.diag(dist)) == [0, 0, 0]

    def test_weight_out_of_range(self):
        with pytest.raises(WorkloadError):
            build_bellman_ford(nodes=2, graph=[(0, 1, 17)])


class TestMergeSort:
    def test_duplicates_and_negatives(self):
        values = np.array([5, -1, 5, 3, 0, -7, 2, 2])
        workload = build_merge_sort(values=values)
        result = _verified(workload, Scenario.DUAL)
        got = read_words(result.memory, workload.data["sorted"], 8)
        assert list(got) == sorted(values.tolist())

    def test_odd_length(self):
        with pytest.raises(WorkloadError):
            build_merge_sort(values=np.arange(5))


class TestMutexes:
    def test_counter_reaches_total(self):
        workload = build_mutexes(total=40)
        result = _verified(workload, Scenario.DUAL)
        assert result.memory.read_word(workload.data["counter"]) == 40
        assert sum(t.atomic_ops for t in result.stats.threads) >= 40

    def test_odd_total(self):
        with pytest.raises(WorkloadError):
            build_mutexes(total=3)

    def test_broken_result_raises_oracle_failure(self):
        workload = build_mutexes(total=8)
        result = run_workload(workload, Scenario.SINGLE)
        result.memory.write_word(workload.data["counter"], 7)
        with pytest.raises(OracleFailure, match="counter = 7"):
            workload.verify(result)


def _dcache_misses(result):
    return sum(t.dcache_accesses - t.dcache_hits for t in result.stats.threads)


def _speedup(workload):
    single = run_workload(workload, Scenario.SINGLE)
    dual = run_workload(workload, Scenario.DUAL)
    workload.verify(single)
    workload.verify(dual)
    return single.total_cycles / dual.total_cycles, single, dual


class TestSpeedup:
    def test_matmul_gains_from_second_thread(self):
        speedup, _, _ = _speedup(build("matrix_mult", {"n": 32}))
        assert speedup >= 1.5

    def test_mem_copy_threads_evict_each_other(self):
        speedup, single, dual = _speedup(build("mem_copy", {"nbytes": 16 * 1024}))
        assert speedup <= 1.0
        assert _dcache_misses(dual) > _dcache_misses(single)

    @pytest.mark.slow
    def test_mem_copy_is_miss_bound(self):
        speedup, _, dual = _speedup(build("mem_copy"))
        assert speedup <= 1.0
        for thread in dual.stats.threads:
            assert thread.dcache_miss_rate >= 0.8
            assert thread.stall_cycles[StallCause.BLOCKED_BY_OTHER_MISS] > 0

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["matrix_mult", "fft", "merge_sort", "dot_product", "bellman_ford", "ecg"])
    def test_parallel_kernels_reach_one_and_a_half(self, name):
        speedup, _, _ = _speedup(build(name))
        assert speedup >= 1.5

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["daxpy", "mutexes"])
    def test_contended_kernels_gain_modestly(self, name):
        speedup, _, _ = _speedup(build(name))
        assert 1.0 < speedup < 1.45
