"""Cycle-level model of the dual-threaded core."""

from .cache import Cache, nmru_victim
from .core import (
    Core,
    CoreConfig,
    Fault,
    Halted,
    MaxCycles,
    RunExit,
    RunResult,
    Scenario,
    ThreadControlError,
    ThreadMode,
    run,
    speedup,
)
from .ibuf import InstrBuffer
from .memory import BackingMemory, BusFault
from .memunit import (
    AccessKind,
    Arbiter,
    Grant,
    GrantStatus,
    MemoryUnit,
    MemRequest,
    MemResponse,
    SimulatorBug,
)
from .pipeline import HardwareThread, ThreadFault, Timing
from .predictor import BranchPredictor, ReturnStack
from .stats import SimStats, StallCause, ThreadStats
from .trace import TraceWriter, parse_trace_line

__all__ = [
    "AccessKind",
    "Arbiter",
    "BackingMemory",
    "BranchPredictor",
    "BusFault",
    "Cache",
    "Core",
    "CoreConfig",
    "Fault",
    "Grant",
    "GrantStatus",
    "Halted",
    "HardwareThread",
    "InstrBuffer",
    "MaxCycles",
    "MemRequest",
    "MemResponse",
    "MemoryUnit",
    "ReturnStack",
    "RunExit",
    "RunResult",
    "Scenario",
    "SimStats",
    "SimulatorBug",
    "StallCause",
    "ThreadControlError",
    "ThreadFault",
    "ThreadMode",
    "ThreadStats",
    "Timing",
    "TraceWriter",
    "nmru_victim",
    "parse_trace_line",
    "run",
    "speedup",
]
