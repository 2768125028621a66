"""Assembly generators for the side-kick protocol.

Register use: the dispatcher keeps the channel base in r20, constants 1/2/3
in r21..r23 and the task table in r24. Invoke and wait sequences on thread 0
use r25..r27 only. Tasks receive arguments in r4..r11 and return r2/r3.
"""

from __future__ import annotations

from collections.abc import Sequence

from ..asm import AsmBuilder
from ..asm.assembler import ireg
from .channel import ERROR_SENTINEL, N_ARGS, ChannelError, ChannelLayout, ChannelStatus, TaskTable

DISPATCH_LABEL = "sk_dispatch"
TABLE_LABEL = "sk_table"
ARG_REGS = tuple(f"r{i}" for i in range(4, 4 + N_ARGS))

Arg = int | str


def _is_register(arg: Arg) -> bool:
    if not isinstance(arg, str):
        return False
    try:
        ireg(arg)
    except Exception:
        return False
    return True


def emit_dispatcher(
    b: AsmBuilder,
    table: TaskTable,
    layout: ChannelLayout,
    spin_delay: int = 6,
    label: str = DISPATCH_LABEL,
) -> AsmBuilder:
    """Thread 1's service loop.

    Spins with plain loads until the status reads REQUEST, marks BUSY,
    calls the task named by fn_id with the argument words in r4..r11, stores
    r2/r3 as the return value and publishes DONE. fn_id 0 returns zeros;
    an fn_id outside the table returns the error sentinel.
    """
    if not len(table):
        raise ChannelError("dispatcher needs at least one task")
    spin = f"{label}_spin"
    noop = f"{label}_noop"
    bad = f"{label}_bad"
    b.label(label)
    b.op(f"li r20, {layout.base:#x}")
    b.op(f"la r24, {TABLE_LABEL}")
    b.ops(
        f"""
        li r21, {ChannelStatus.REQUEST.value}
        li r22, {ChannelStatus.BUSY.value}
        li r23, {ChannelStatus.DONE.value}
        """
    )
    b.label(spin)
    for _ in range(spin_delay):
        b.op("nop")
    b.ops(
        f"""
        lw r25, {layout.STATUS}(r20)
        bne r25, r21, {spin}
        sw r22, {layout.STATUS}(r20)
        lw r25, {layout.FN_ID}(r20)
        beq r25, r0, {noop}
        blt r25, r0, {bad}
        li r26, {len(table)}
        blt r26, r25, {bad}
        slli r25, r25, 2
        add r25, r25, r24
        lw r25, -4(r25)
        """
    )
    for index, reg in enumerate(ARG_REGS):
        b.op(f"lw {reg}, {layout.arg_offset(index)}(r20)")
    b.ops(
        f"""
        jalr r31, r25, 0
        li r20, {layout.base:#x}
        li r23, {ChannelStatus.DONE.value}
        sw r2, {layout.retval_offset(0)}(r20)
        sw r3, {layout.retval_offset(1)}(r20)
        sw r23, {layout.STATUS}(r20)
        j {label}
        {noop}:
        sw r0, {layout.retval_offset(0)}(r20)
        sw r0, {layout.retval_offset(1)}(r20)
        sw r23, {layout.STATUS}(r20)
        j {spin}
        {bad}:
        li r25, {ERROR_SENTINEL:#x}
        sw r25, {layout.retval_offset(0)}(r20)
        sw r25, {layout.retval_offset(1)}(r20)
        sw r23, {layout.STATUS}(r20)
        j {label}
        """
    )
    return b


def emit_task_table(b: AsmBuilder, table: TaskTable) -> AsmBuilder:
    """Word table of task entry addresses, placed after the code."""
    b.directive(".align", 8)
    b.label(TABLE_LABEL)
    b.words(table.labels)
    return b


def emit_invoke(b: AsmBuilder, fn_id: int, args: Sequence[Arg], layout: ChannelLayout) -> AsmBuilder:
    """Write args, then fn_id, then REQUEST into the channel (status last).

    Each argument is a register name or a literal/label value.
    """
    if len(args) > N_ARGS:
        raise ChannelError(f"at most {N_ARGS} arguments, got {len(args)}")
    if fn_id < 0:
        raise ChannelError(f"fn_id must be non-negative, got {fn_id}")
    b.op(f"li r26, {layout.base:#x}")
    for index, arg in enumerate(args):
        offset = layout.arg_offset(index)
        if _is_register(arg):
            b.op(f"sw {arg}, {offset}(r26)")
        else:
            b.op(f"li r25, {arg}")
            b.op(f"sw r25, {offset}(r26)")
    if fn_id == 0:
        b.op(f"sw r0, {layout.FN_ID}(r26)")
    else:
        b.op(f"li r25, {fn_id}")
        b.op(f"sw r25, {layout.FN_ID}(r26)")
    b.op(f"li r25, {ChannelStatus.REQUEST.value}")
    b.op(f"sw r25, {layout.STATUS}(r26)")
    return b


def emit_wait(b: AsmBuilder, layout: ChannelLayout) -> AsmBuilder:
    """Spin until DONE, hand the channel back (IDLE), load r2/r3 from retval."""
    loop = b.unique("sk_wait")
    b.op(f"li r26, {layout.base:#x}")
    b.op(f"li r27, {ChannelStatus.DONE.value}")
    b.label(loop)
    b.ops(
        f"""
        lw r25, {layout.STATUS}(r26)
        bne r25, r27, {loop}
        sw r0, {layout.STATUS}(r26)
        lw r2, {layout.retval_offset(0)}(r26)
        lw r3, {layout.retval_offset(1)}(r26)
        """
    )
    return b
