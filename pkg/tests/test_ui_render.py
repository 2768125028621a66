"""Smoke tests for the renderers.

Each renderer is printed to a recording console and the plain text is
checked for expected substrings. Shape, not exact spacing.
"""

import pytest
from rich.console import Console

from twinsim.asm import assemble
from twinsim.bench import run_bench
from twinsim.config import SimConfig
from twinsim.sidekick import REFERENCE_CYCLES, RoundTrip
from twinsim.sim import CoreConfig, Scenario, run
from twinsim.ui import render
from twinsim.workloads import REGISTRY


def _render_to_text(renderable, width: int = 120) -> str:
    console = Console(record=True, width=width)
    console.print(renderable)
    return console.export_text()


def _run(source: str):
    return run([assemble(source)], CoreConfig(n_threads=1), {0: 0})


@pytest.fixture(scope="module")
def bench_report():
    return run_bench(["daxpy"], (Scenario.SINGLE, Scenario.DUAL), quick=True)


class TestRunSummary:
    def test_halted_run(self):
        text = _render_to_text(render.render_run_summary(_run("halt\n"), "halt-only"))
        assert "halt-only" in text
        assert "halted" in text
        assert "31 cycles" in text
        assert "retired" in text

    def test_stall_breakdown_skips_zero_causes(self):
        text = _render_to_text(render.render_stall_breakdown(_run("halt\n")))
        assert "stall cycles" in text
        assert "own_miss" in text
        assert "fp_long" not in text

    def test_fault_panel(self):
        text = _render_to_text(render.render_fault(_run(".word 0\n")))
        assert "✘ fault" in text
        assert "illegal_instruction" in text
        assert "0x00000000" in text

    def test_max_cycles_panel(self):
        result = run([assemble("spin: j spin\n")], CoreConfig(n_threads=1, max_cycles=100), {0: 0})
        assert "run ended with max_cycles" in _render_to_text(render.render_fault(result))


class TestBenchMatrix:
    def test_columns_and_digest(self, bench_report):
        text = _render_to_text(render.render_bench_matrix(bench_report))
        assert bench_report.config.digest() in text
        assert "single" in text
        assert "0 act / 1 act" in text
        assert "0 act / 1 spin" not in text
        assert f"{bench_report.rows[0].speedup:.2f}x" in text

    def test_clean_matrix_has_no_failure_panel(self, bench_report):
        assert render.render_failures(bench_report) is None

    def test_failure_panel(self):
        report = run_bench(["daxpy"], (Scenario.SINGLE,), SimConfig(max_cycles=100), quick=True)
        matrix = _render_to_text(render.render_bench_matrix(report))
        assert "max_cycles" in matrix
        text = _render_to_text(render.render_failures(report))
        assert "1 failed cell(s)" in text
        assert "daxpy / single" in text


class TestRoundTrip:
    def test_steady(self):
        text = _render_to_text(render.render_roundtrip(RoundTrip(samples=(40, 40, 40))))
        assert "✔ side-kick round trip" in text
        assert "40 / 40 cycles" in text
        assert f"{REFERENCE_CYCLES} cycles" in text

    def test_free_running_line(self):
        rt = RoundTrip(samples=(40, 40), free_running=(38, 45))
        text = _render_to_text(render.render_roundtrip(rt))
        assert "38 / 45 cycles" in text

    def test_violations_listed(self):
        rt = RoundTrip(samples=(40, 44), violations=("cycle 9: moved status IDLE -> DONE",))
        text = _render_to_text(render.render_roundtrip(rt))
        assert "✘ side-kick round trip" in text
        assert "IDLE -> DONE" in text


class TestMisc:
    def test_workload_list(self):
        text = _render_to_text(render.render_workload_list(REGISTRY))
        assert "workloads" in text
        for name in REGISTRY:
            assert name in text

    def test_error_line(self):
        assert _render_to_text(render.render_error("bad thing", "asm")).strip() == "✘ asm: bad thing"
