"""Evaluation matrix and report files."""

import csv
import io
import json
import time

import pytest

from twinsim.bench import (
    CSV_COLUMNS,
    SCENARIOS,
    parse_scenarios,
    parse_workloads,
    report_csv,
    report_json,
    run_bench,
    run_cell,
    write_report,
)
from twinsim.config import SimConfig
from twinsim.sim import Scenario
from twinsim.workloads import SUITE, WorkloadError


@pytest.fixture(scope="module")
def small_report():
    return run_bench(["daxpy", "mutexes"], SCENARIOS, quick=True, seed=3)


class TestParsing:
    def test_all_scenarios(self):
        assert parse_scenarios(["all"]) == SCENARIOS
        assert parse_scenarios([]) == SCENARIOS

    def test_canonical_order(self):
        assert parse_scenarios(["dual", "single"]) == (Scenario.SINGLE, Scenario.DUAL)

    def test_unknown_scenario(self):
        with pytest.raises(WorkloadError, match="unknown scenario"):
            parse_scenarios(["triple"])

    def test_workloads(self):
        assert parse_workloads(["all"]) == SUITE
        assert parse_workloads(["ecg", "fft"]) == ("fft", "ecg")
        with pytest.raises(WorkloadError):
            parse_workloads(["nbody"])


# quick-size suite, single and dual, two worker processes
SMOKE_BUDGET_SECONDS = 120


class TestRunBench:
    def test_every_cell_passes(self, small_report):
        assert small_report.ok
        assert small_report.failures() == []
        assert [row.name for row in small_report.rows] == ["daxpy", "mutexes"]
        assert all(len(row.cells) == 4 for row in small_report.rows)

    def test_cells_record_wall_time(self, small_report):
        cells = [c for row in small_report.rows for c in row.cells.values()]
        assert all(c.wall_seconds > 0 for c in cells)
        assert "wall_seconds" not in report_json(small_report)

    def test_quick_suite_fits_smoke_budget(self):
        started = time.perf_counter()
        report = run_bench(SUITE, (Scenario.SINGLE, Scenario.DUAL), quick=True, jobs=2)
        elapsed = time.perf_counter() - started
        assert report.ok, report.failures()
        assert elapsed < SMOKE_BUDGET_SECONDS

    def test_speedup(self, small_report):
        row = small_report.rows[0]
        assert row.speedup == row.cycles(Scenario.SINGLE) / row.cycles(Scenario.DUAL)

    def test_single_equals_inactive(self, small_report):
        for row in small_report.rows:
            assert row.cycles(Scenario.SINGLE) == row.cycles(Scenario.INACTIVE)

    def test_csv(self, small_report):
        rows = list(csv.reader(io.StringIO(report_csv(small_report))))
        assert tuple(rows[0]) == CSV_COLUMNS == ("workload", "single", "inactive", "spinning", "dual", "speedup")
        assert rows[1][0] == "daxpy"
        assert int(rows[1][1]) == small_report.rows[0].cycles(Scenario.SINGLE)
        assert float(rows[1][5]) == pytest.approx(small_report.rows[0].speedup, abs=1e-4)

    def test_json_is_deterministic(self, small_report):
        again = run_bench(["daxpy", "mutexes"], SCENARIOS, quick=True, seed=3)
        assert report_json(again) == report_json(small_report)
        data = json.loads(report_json(small_report))
        assert data["metadata"]["config_digest"] == SimConfig().digest()
        assert data["metadata"]["seed"] == 3
        assert set(data["workloads"]["daxpy"]["scenarios"]) == {s.value for s in SCENARIOS}

    def test_write_report(self, small_report, tmp_path):
        write_report(small_report, tmp_path / "out" / "bench.json", tmp_path / "bench.csv")
        assert json.loads((tmp_path / "out" / "bench.json").read_text())["workloads"]
        assert (tmp_path / "bench.csv").read_text().startswith("workload,")

    def test_subset_of_scenarios(self):
        report = run_bench(["daxpy"], (Scenario.DUAL,), quick=True)
        row = report.rows[0]
        assert list(row.cells) == ["dual"]
        assert row.speedup is None
        line = report_csv(report).splitlines()[1]
        assert line.startswith("daxpy,,,,")


class TestRunCell:
    def test_build_error_is_a_cell_status(self):
        cell = run_cell("daxpy", Scenario.SINGLE, SimConfig(), {"n": 7})
        assert cell.status == "error"
        assert not cell.ok
        assert "multiple of 4" in cell.problems[0]

    def test_max_cycles_is_a_cell_status(self):
        cell = run_cell("daxpy", Scenario.SINGLE, SimConfig(max_cycles=100), quick=True)
        assert cell.status == "max_cycles"
        assert cell.total_cycles == 100

    def test_ecg_cell_carries_report(self):
        cell = run_cell("ecg", Scenario.DUAL, SimConfig(), quick=True)
        assert cell.ok, cell.problems
        assert set(cell.extra["stages"]) == {"convert", "fft", "filter", "inverse", "detect", "hermite"}

    def test_failed_cell_in_csv(self):
        report = run_bench(["daxpy"], (Scenario.SINGLE,), SimConfig(max_cycles=100), quick=True)
        assert not report.ok
        assert report.failure_statuses() == [("daxpy", "max_cycles")]
        assert report_csv(report).splitlines()[1] == "daxpy,max_cycles,,,,"
