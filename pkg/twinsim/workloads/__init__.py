"""Benchmark workloads: program images, host data and oracles."""

from .base import (
    DATA_BASE,
    ENTRY_DUAL,
    ENTRY_SINGLE,
    TEXT_BASE,
    Call,
    DataImage,
    KernelProgram,
    OracleFailure,
    Workload,
    WorkloadError,
    run_workload,
)
from .probes import Visibility, store_visibility_probe, tas_counter_probe
from .registry import REGISTRY, SUITE, WorkloadSpec, build, parse_sizes

__all__ = [
    "DATA_BASE",
    "ENTRY_DUAL",
    "ENTRY_SINGLE",
    "REGISTRY",
    "SUITE",
    "TEXT_BASE",
    "Call",
    "DataImage",
    "KernelProgram",
    "OracleFailure",
    "Visibility",
    "Workload",
    "WorkloadError",
    "WorkloadSpec",
    "build",
    "parse_sizes",
    "run_workload",
    "store_visibility_probe",
    "tas_counter_probe",
]
