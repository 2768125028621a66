"""Side-kick cooperative runtime: channel, code generators, round-trip probe."""

from .channel import (
    CHANNEL_BYTES,
    ERROR_SENTINEL,
    N_ARGS,
    ChannelError,
    ChannelLayout,
    ChannelProbe,
    ChannelStatus,
    TaskTable,
)
from .codegen import (
    ARG_REGS,
    DISPATCH_LABEL,
    TABLE_LABEL,
    emit_dispatcher,
    emit_invoke,
    emit_task_table,
    emit_wait,
)
from .roundtrip import REFERENCE_CYCLES, RoundTrip, build_roundtrip_program, measure_roundtrip, run_roundtrip

__all__ = [
    "ARG_REGS",
    "CHANNEL_BYTES",
    "DISPATCH_LABEL",
    "ERROR_SENTINEL",
    "N_ARGS",
    "REFERENCE_CYCLES",
    "TABLE_LABEL",
    "ChannelError",
    "ChannelLayout",
    "ChannelProbe",
    "ChannelStatus",
    "RoundTrip",
    "TaskTable",
    "build_roundtrip_program",
    "emit_dispatcher",
    "emit_invoke",
    "emit_task_table",
    "emit_wait",
    "measure_roundtrip",
    "run_roundtrip",
]
