"""Tests for opt-in simulator event logging."""

import json

from twinsim import logging as logging_mod
from twinsim.asm import assemble
from twinsim.sim import CoreConfig, Fault, run


def _entries(tmp_path) -> list[dict]:
    return [json.loads(line) for line in next(tmp_path.glob("*.jsonl")).read_text().splitlines()]


def test_logger_disabled_does_not_write(tmp_path, monkeypatch):
    monkeypatch.setattr(logging_mod, "LOG_DIR", tmp_path)

    logger = logging_mod.SimLogger(enabled=False)
    logger.log_run_start("daxpy", "single", "0123456789abcdef")
    logger.log_warning("smc_warning", "cycle 3: store")

    assert list(tmp_path.glob("*.jsonl")) == []


def test_logger_enabled_writes_events(tmp_path, monkeypatch):
    monkeypatch.setattr(logging_mod, "LOG_DIR", tmp_path)

    logger = logging_mod.SimLogger(enabled=True)
    logger.log_run_start("daxpy", "dual", "0123456789abcdef")
    logger.log_run_end("daxpy", "dual", "halted", 1234)

    entries = _entries(tmp_path)
    assert [e["type"] for e in entries] == ["session_start", "run_start", "run_end"]
    assert entries[2]["total_cycles"] == 1234
    assert entries[1]["config"] == "0123456789abcdef"


def test_log_error_includes_traceback(tmp_path, monkeypatch):
    monkeypatch.setattr(logging_mod, "LOG_DIR", tmp_path)

    logger = logging_mod.SimLogger(enabled=True)
    try:
        raise RuntimeError("boom")
    except RuntimeError as exc:
        logger.log_error(exc)

    event = next(e for e in _entries(tmp_path) if e["type"] == "error")
    assert event["error"] == "boom"
    assert any("RuntimeError" in line for line in event["traceback"])


def test_warning_message_is_truncated(tmp_path, monkeypatch):
    monkeypatch.setattr(logging_mod, "LOG_DIR", tmp_path)

    logging_mod.SimLogger(enabled=True).log_warning("channel_violation", "x" * 2000, cycle=9)

    event = next(e for e in _entries(tmp_path) if e["type"] == "channel_violation")
    assert len(event["message"]) == 500
    assert event["cycle"] == 9


def test_global_logger_defaults_off(monkeypatch):
    monkeypatch.setattr(logging_mod, "_logger", None)
    assert logging_mod.get_logger().enabled is False


def test_core_reports_faults_through_global_logger(tmp_path, monkeypatch):
    monkeypatch.setattr(logging_mod, "LOG_DIR", tmp_path)
    monkeypatch.setattr(logging_mod, "_logger", None)
    logging_mod.init_logger(enabled=True)

    run([assemble(".word 0\n")], CoreConfig(n_threads=1), {0: 0})

    event = next(e for e in _entries(tmp_path) if e["type"] == "fault")
    assert event["kind"] == "illegal_instruction"
    assert event["tid"] == 0


def test_fault_run_ends_with_fault_when_logging_is_off(monkeypatch):
    monkeypatch.setattr(logging_mod, "_logger", None)

    result = run([assemble(".word 0\n")], CoreConfig(n_threads=1), {0: 0})

    assert isinstance(result.exit, Fault)
    assert result.exit.kind == "illegal_instruction"
    assert result.exit_kind == "fault"


def test_bench_events(tmp_path, monkeypatch):
    monkeypatch.setattr(logging_mod, "LOG_DIR", tmp_path)

    logger = logging_mod.SimLogger(enabled=True)
    logger.log_bench_cell("fft", "dual", "oracle_failure", 5000)
    logger.log_oracle_failure("fft", [f"bin {i}" for i in range(9)], "dual")

    cell, failure = _entries(tmp_path)[1:]
    assert cell["status"] == "oracle_failure"
    assert failure["problems"] == ["bin 0", "bin 1", "bin 2", "bin 3", "bin 4"]
    assert failure["scenario"] == "dual"
