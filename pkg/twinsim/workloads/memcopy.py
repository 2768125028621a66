"""Strided block copy: thread 0 copies the even word columns, thread 1 the odd.

Each thread first copies its columns one word per line visit, then two words
per visit. Thread 1 starts half a block in, which for blocks of two cache
ways or more puts both threads on lines of the same set. Alone, a thread
hits on the second word of a pair visit; together, the four lines in one
set evict each other and nearly every access misses. Before the copy,
thread 0 reads a cache-sized flush buffer so the copy lines only ever get
the two replaceable ways of each set.
"""

from __future__ import annotations

import numpy as np

from ..asm import AsmBuilder
from ..config import SimConfig
from .base import Call, DataImage, KernelProgram, Workload, WorkloadError, compare_exact, read_words

LINE = 64
WORDS_PER_LINE = LINE // 4
SINGLE_PASSES = 4
PAIR_PASSES = 2

assert SINGLE_PASSES + 2 * PAIR_PASSES == WORDS_PER_LINE // 2

_SINGLE_BODY = """
lw r1, 0(r13)
sw r1, 0(r14)
"""

# load and store alternate so each access touches the other line
_PAIR_BODY = """
lw r1, 0(r13)
sw r1, 0(r14)
lw r2, 8(r13)
sw r2, 8(r14)
"""


def _copy_passes(tag: str, body: str, passes: int, column_step: int) -> str:
    # r12 column byte offset, r10 start line offset, r9 passes left
    return f"""
    li r9, {passes}
    mc_{tag}:
    add r13, r4, r12
    add r13, r13, r10
    add r14, r5, r12
    add r14, r14, r10
    sub r15, r7, r8
    beq r15, r0, mc_{tag}_wrap
    mc_{tag}_head:
    {body}
    addi r13, r13, {LINE}
    addi r14, r14, {LINE}
    addi r15, r15, -1
    bne r15, r0, mc_{tag}_head
    mc_{tag}_wrap:
    add r13, r4, r12
    add r14, r5, r12
    mv r15, r8
    beq r15, r0, mc_{tag}_next
    mc_{tag}_tail:
    {body}
    addi r13, r13, {LINE}
    addi r14, r14, {LINE}
    addi r15, r15, -1
    bne r15, r0, mc_{tag}_tail
    mc_{tag}_next:
    addi r12, r12, {column_step}
    addi r9, r9, -1
    bne r9, r0, mc_{tag}
    """


def emit_copy_tasks(p: KernelProgram) -> None:
    # copy_cols(src, dst, first_col, n_lines, start_line)
    p.task("copy_cols").ops(
        "slli r12, r6, 2\nslli r10, r8, 6\n"
        + _copy_passes("one", _SINGLE_BODY, SINGLE_PASSES, 8)
        + _copy_passes("two", _PAIR_BODY, PAIR_PASSES, 16)
        + "ret\n"
    )
    # flush_sweep(buf, n_lines): one load per line
    p.routine("flush_sweep").ops(
        f"""
        fl_loop:
        lw r1, 0(r4)
        addi r4, r4, {LINE}
        addi r5, r5, -1
        bne r5, r0, fl_loop
        ret
        """
    )


def build_mem_copy(nbytes: int = 32 * 1024, seed: int = 4, sim: SimConfig | None = None) -> Workload:
    if nbytes < 2 * LINE or nbytes % LINE:
        raise WorkloadError(f"mem_copy needs a whole number of lines (at least 2), got {nbytes}")
    sim = sim or SimConfig()
    rng = np.random.default_rng(seed)
    src = rng.integers(0, 2**32, nbytes // 4, dtype=np.uint64).astype("<u4")
    lines = nbytes // LINE
    way_bytes = sim.dcache.size_bytes // sim.dcache.associativity
    flush_lines = sim.dcache.size_bytes // LINE

    data = DataImage()
    flush = data.alloc("flush", sim.dcache.size_bytes, align=way_bytes)
    # line j of src and dst share a set
    src_addr = data.place("src", src, align=way_bytes)
    dst_addr = data.alloc("dst", nbytes, align=way_bytes)

    p = KernelProgram("mem_copy", sim)
    emit_copy_tasks(p)

    def emit_main(b: AsmBuilder, dual: bool) -> None:
        p.call(b, Call("flush_sweep", (flush, flush_lines)))
        p.parallel(
            b,
            Call("copy_cols", (src_addr, dst_addr, 0, lines, 0)),
            Call("copy_cols", (src_addr, dst_addr, 1, lines, lines // 2)),
            dual,
        )

    program, source = p.build(emit_main)

    def check(mem) -> list[str]:
        return compare_exact("dst", read_words(mem, dst_addr, nbytes // 4, signed=False), src)

    return Workload(
        name="mem_copy",
        sizes={"nbytes": nbytes},
        partitioning="interleaved",
        program=program,
        source=source,
        data=data,
        channel_base=sim.channel_base,
        oracle_id="copy_exact",
        check=check,
        notes={
            "seed": seed,
            "flush_bytes": sim.dcache.size_bytes,
            "single_word_passes": SINGLE_PASSES,
            "pair_passes": PAIR_PASSES,
            "sets_shared": (lines // 2) * LINE % way_bytes == 0,
        },
    )
