"""Bench report files: canonical JSON plus a figure-shaped CSV."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from ..utils import AtomicFileWriter
from .harness import SCENARIOS, BenchReport

CSV_COLUMNS = ("workload", *(s.value for s in SCENARIOS), "speedup")


def report_json(report: BenchReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def report_csv(report: BenchReport) -> str:
    """One row per workload; a failed cell shows its status instead of a number."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in report.rows:
        line: list[str] = [row.name]
        for scenario in SCENARIOS:
            cell = row.cells.get(scenario.value)
            if cell is None:
                line.append("")
            elif cell.ok:
                line.append(str(cell.total_cycles))
            else:
                line.append(cell.status)
        speedup = row.speedup
        line.append("" if speedup is None else f"{speedup:.4f}")
        writer.writerow(line)
    return buf.getvalue()


def write_report(report: BenchReport, json_path: Path | None, csv_path: Path | None = None) -> None:
    if json_path is not None:
        AtomicFileWriter.write(Path(json_path), report_json(report))
    if csv_path is not None:
        AtomicFileWriter.write(Path(csv_path), report_csv(report))


__all__ = ["CSV_COLUMNS", "report_csv", "report_json", "write_report"]
