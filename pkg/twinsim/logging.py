"""Opt-in JSONL event log of simulator runs.

Off unless ``--log`` is given. Each process writes its own
``~/.twinsim/logs/session_<timestamp>_<pid>.jsonl``; a failing write never
interrupts a run.
"""

import contextlib
import json
import os
import traceback
from datetime import datetime
from pathlib import Path
from typing import Any

LOG_DIR = Path.home() / ".twinsim" / "logs"

MESSAGE_LIMIT = 500


class SimLogger:
    """Appends one JSON object per simulator event."""

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self.session_id = f"{datetime.now():%Y%m%d_%H%M%S}_{os.getpid()}"
        self.log_path = LOG_DIR / f"session_{self.session_id}.jsonl"
        self.log_event("session_start", pid=os.getpid())

    def log_event(self, event: str, **data: Any) -> None:
        if not self.enabled:
            return
        entry = {"type": event, **data, "timestamp": datetime.now().isoformat()}
        with contextlib.suppress(OSError, TypeError, ValueError):
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            line = json.dumps(entry, ensure_ascii=False, default=str)
            with self.log_path.open("a", encoding="utf-8") as f:
                f.write(line + "\n")

    def log_run_start(self, workload: str, scenario: str, config_digest: str) -> None:
        self.log_event("run_start", workload=workload, scenario=scenario, config=config_digest)

    def log_run_end(self, workload: str, scenario: str, exit_kind: str, total_cycles: int) -> None:
        self.log_event(
            "run_end",
            workload=workload,
            scenario=scenario,
            exit=exit_kind,
            total_cycles=total_cycles,
        )

    def log_fault(self, tid: int, pc: int, kind: str, cycle: int) -> None:
        self.log_event("fault", tid=tid, pc=pc, kind=kind, cycle=cycle)

    def log_warning(self, kind: str, message: str, cycle: int | None = None) -> None:
        """``kind`` is ``smc_warning`` or ``channel_violation``."""
        self.log_event(kind, message=message[:MESSAGE_LIMIT], cycle=cycle)

    def log_bench_cell(
        self, workload: str, scenario: str, status: str, total_cycles: int, wall_seconds: float | None = None
    ) -> None:
        self.log_event(
            "bench_cell",
            workload=workload,
            scenario=scenario,
            status=status,
            total_cycles=total_cycles,
            wall_seconds=None if wall_seconds is None else round(wall_seconds, 3),
        )

    def log_oracle_failure(self, workload: str, problems: list[str], scenario: str | None = None) -> None:
        self.log_event("oracle_failure", workload=workload, scenario=scenario, problems=problems[:5])

    def log_error(self, error: str | BaseException, **data: Any) -> None:
        """Exceptions are logged with their formatted traceback."""
        if isinstance(error, BaseException):
            data["traceback"] = traceback.format_exception(error)
        self.log_event("error", error=str(error), **data)


_logger: SimLogger | None = None


def get_logger() -> SimLogger:
    """The process-wide logger; a disabled one until ``init_logger`` runs."""
    global _logger
    if _logger is None:
        _logger = SimLogger(enabled=False)
    return _logger


def init_logger(enabled: bool = True) -> SimLogger:
    global _logger
    _logger = SimLogger(enabled=enabled)
    return _logger
