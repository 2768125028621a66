"""Evaluation matrix and its report files."""

from .harness import (
    CELL_STATUSES,
    SCENARIOS,
    BenchReport,
    CellResult,
    WorkloadRow,
    parse_scenarios,
    parse_workloads,
    run_bench,
    run_cell,
)
from .report import CSV_COLUMNS, report_csv, report_json, write_report

__all__ = [
    "CELL_STATUSES",
    "CSV_COLUMNS",
    "SCENARIOS",
    "BenchReport",
    "CellResult",
    "WorkloadRow",
    "parse_scenarios",
    "parse_workloads",
    "report_csv",
    "report_json",
    "run_bench",
    "run_cell",
    "write_report",
]
