"""The dual-threaded core: scenarios, thread control and run results."""

import copy

import pytest

from twinsim.asm import assemble
from twinsim.config import SimConfig
from twinsim.sim import (
    Core,
    CoreConfig,
    Halted,
    RunResult,
    Scenario,
    SimStats,
    ThreadControlError,
    ThreadMode,
    ThreadStats,
    run,
    speedup,
)


def _loops(main_iterations: int, worker_iterations: int = 0) -> str:
    """Thread 0 counts down in ``main``; thread 1 spins or counts down in ``worker``."""
    worker = (
        f"li r7, {worker_iterations}\nwloop:\naddi r7, r7, -1\nbne r7, r0, wloop\nhalt\n"
        if worker_iterations
        else "spin:\nj spin\n"
    )
    return (
        ".org 0x1000\n.global main\n.global worker\n"
        f"main:\nli r6, {main_iterations}\nloop:\naddi r6, r6, -1\nbne r6, r0, loop\nhalt\n"
        f".align 64\nworker:\n{worker}"
    )


def _entries(program) -> dict[int, int]:
    return {0: program.entry_points["main"], 1: program.entry_points["worker"]}


def _run_mode(source: str, mode: ThreadMode | None, *, service: bool = False) -> RunResult:
    program = assemble(source)
    if mode is None:
        cfg = CoreConfig(n_threads=1)
    else:
        cfg = CoreConfig(n_threads=2, thread1_mode=mode, thread1_service=service)
    return run([program], cfg, _entries(program))


class TestScenarios:
    def test_scenario_shapes(self):
        assert Scenario.SINGLE.n_threads == 1
        assert Scenario.DUAL.thread1_mode is ThreadMode.ACTIVE
        assert Scenario.SPINNING.label == "0 active, 1 spinning"

    def test_from_sim_config(self):
        sim = SimConfig()
        spinning = CoreConfig.from_sim_config(sim, Scenario.SPINNING)
        assert spinning.n_threads == 2
        assert spinning.thread1_service
        assert not CoreConfig.from_sim_config(sim, Scenario.INACTIVE).thread1_service
        assert not CoreConfig.from_sim_config(sim, Scenario.DUAL, service=False).thread1_service

    def test_bad_thread_count(self):
        with pytest.raises(ValueError):
            CoreConfig(n_threads=3)

    def test_inactive_thread_costs_nothing(self):
        source = _loops(50)
        single = _run_mode(source, None)
        inactive = _run_mode(source, ThreadMode.INACTIVE)
        assert inactive.total_cycles == single.total_cycles
        assert inactive.stats.threads[1].cycles_active == 0
        assert not inactive.threads[1].active

    def test_spinning_thread_never_speeds_up_thread0(self):
        source = _loops(50)
        inactive = _run_mode(source, ThreadMode.INACTIVE)
        spinning = _run_mode(source, ThreadMode.SPINNING, service=True)
        assert spinning.ok
        assert spinning.total_cycles >= inactive.total_cycles
        t0_inactive, t0_spinning = inactive.stats.threads[0], spinning.stats.threads[0]
        assert t0_spinning.instructions_retired == t0_inactive.instructions_retired
        assert spinning.stats.check() == []

    @pytest.mark.parametrize("iterations", [10, 500])
    def test_spinning_thread_fetches_once(self, iterations):
        result = _run_mode(_loops(iterations), ThreadMode.SPINNING, service=True)
        assert result.stats.threads[1].icache_accesses == 1
        assert result.stats.threads[1].dcache_accesses == 0

    def test_disjoint_loops_barely_interfere(self):
        solo = _run_mode(_loops(2000), None)
        dual = _run_mode(_loops(2000, 2000), ThreadMode.ACTIVE)
        assert dual.ok
        assert dual.threads[1].halted
        base = solo.stats.threads[0].cycles_active
        assert abs(dual.stats.threads[0].cycles_active - base) <= base * 0.02
        assert dual.stats.check() == []


class TestThreadControl:
    def test_unknown_thread(self):
        core = Core(CoreConfig(n_threads=1))
        with pytest.raises(ThreadControlError):
            core.set_thread_active(1, True, pc=0)

    def test_cannot_deactivate_last_thread(self):
        core = Core(CoreConfig(n_threads=1))
        core.start({0: 0})
        with pytest.raises(ThreadControlError):
            core.set_thread_active(0, False)

    def test_result_before_finish(self):
        with pytest.raises(ThreadControlError):
            Core(CoreConfig(n_threads=1)).result()

    def test_start_skips_inactive_thread1(self):
        core = Core(CoreConfig(n_threads=2, thread1_mode=ThreadMode.INACTIVE))
        core.start({0: 0, 1: 0})
        assert core.threads[0].active
        assert not core.threads[1].active

    def test_late_activation(self):
        program = assemble(_loops(100, 20))
        core = Core(CoreConfig(n_threads=2, thread1_mode=ThreadMode.ACTIVE))
        core.load(program)
        core.start({0: program.entry_points["main"]})
        assert core.advance(until=50) is None
        assert core.now == 50
        core.set_thread_active(1, True, pc=program.entry_points["worker"])
        assert isinstance(core.advance(), Halted)
        result = core.result()
        t0, t1 = result.stats.threads
        assert t1.activations == 1
        assert t1.instructions_retired == 1 + 2 * 20 + 1
        assert t1.cycles_active < t0.cycles_active
        assert result.stats.check() == []

    def test_deactivation_leaves_a_solo_suffix(self):
        program = assemble(
            ".org 0x1000\n.global main\n.global worker\n"
            "main:\nli r6, 300\nli r8, 0x20000\n"
            "loop:\nlw r9, 0(r8)\naddi r9, r9, 1\nsw r9, 0(r8)\naddi r8, r8, 64\n"
            "addi r6, r6, -1\nbne r6, r0, loop\nhalt\n"
            ".align 64\nworker:\nli r7, 0x30000\n"
            "wloop:\nlw r10, 0(r7)\naddi r7, r7, 64\nj wloop\n"
        )
        core = Core(CoreConfig(n_threads=2, thread1_mode=ThreadMode.ACTIVE))
        core.load(program)
        core.start(_entries(program))
        assert core.advance(until=500) is None
        assert not core.threads[0].halted

        mem, main = copy.deepcopy((core.mem, core.threads[0]))
        solo = Core(CoreConfig(n_threads=1))
        solo.mem, solo.threads, solo.now = mem, [main], core.now

        core.set_thread_active(1, False)
        assert isinstance(core.advance(), Halted)
        assert isinstance(solo.advance(), Halted)
        assert core.total_cycles == solo.total_cycles
        assert core.threads[0].iregs == solo.threads[0].iregs
        assert core.threads[0].stats == solo.threads[0].stats
        assert core.mem.read_bytes(0x20000, 300 * 64) == solo.mem.read_bytes(0x20000, 300 * 64)


class TestResults:
    def test_self_modifying_store_warns(self):
        result = run(
            [assemble(".org 0x1000\nstart: la r1, start\nsw r0, 0(r1)\nhalt\n")],
            CoreConfig(n_threads=1),
            {0: 0x1000},
        )
        assert result.ok
        assert result.warnings == [
            "cycle 33: thread 0 stored to 0x00001000, buffered as an instruction by thread 0"
        ]
        assert result.to_dict()["warnings"] == result.warnings

    def test_fault_in_dict(self):
        result = run([assemble(".word 0\n")], CoreConfig(n_threads=1), {0: 0})
        data = result.to_dict()
        assert data["exit"] == "fault"
        assert data["fault"]["kind"] == "illegal_instruction"

    def test_speedup(self):
        def fake(cycles: int) -> RunResult:
            return RunResult(SimStats([ThreadStats()], total_cycles=cycles), Halted(), None, [])

        assert speedup(fake(300), fake(200)) == 1.5
        with pytest.raises(ValueError):
            speedup(fake(300), fake(0))
