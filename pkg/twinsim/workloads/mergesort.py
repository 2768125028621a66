"""Bottom-up merge sort of signed words: each thread sorts one half, thread 0
merges the halves."""

from __future__ import annotations

import numpy as np

from ..asm import AsmBuilder
from ..config import SimConfig
from .base import Call, DataImage, KernelProgram, Workload, WorkloadError, compare_exact, read_words


def emit_merge(b: AsmBuilder, prefix: str, pa: str, ea: str, pb: str, eb: str, pd: str, x: str, y: str) -> None:
    """Stable two-way merge of [pa, ea) and [pb, eb) into pd. Advances all pointers."""
    b.ops(
        f"""
        {prefix}_loop:
        bge {pa}, {ea}, {prefix}_rest_b
        bge {pb}, {eb}, {prefix}_rest_a
        lw {x}, 0({pa})
        lw {y}, 0({pb})
        blt {y}, {x}, {prefix}_take_b
        sw {x}, 0({pd})
        addi {pa}, {pa}, 4
        addi {pd}, {pd}, 4
        j {prefix}_loop
        {prefix}_take_b:
        sw {y}, 0({pd})
        addi {pb}, {pb}, 4
        addi {pd}, {pd}, 4
        j {prefix}_loop
        {prefix}_rest_a:
        bge {pa}, {ea}, {prefix}_done
        lw {x}, 0({pa})
        sw {x}, 0({pd})
        addi {pa}, {pa}, 4
        addi {pd}, {pd}, 4
        j {prefix}_rest_a
        {prefix}_rest_b:
        bge {pb}, {eb}, {prefix}_done
        lw {y}, 0({pb})
        sw {y}, 0({pd})
        addi {pb}, {pb}, 4
        addi {pd}, {pd}, 4
        j {prefix}_rest_b
        {prefix}_done:
        """
    )


def emit_sort_tasks(p: KernelProgram) -> None:
    # msort(arr, tmp, n): sorted result ends in arr
    b = p.task("msort")
    b.ops(
        """
        slli r6, r6, 2
        li r7, 4
        mv r8, r4
        mv r9, r5
        ms_pass:
        bge r7, r6, ms_finish
        li r10, 0
        add r13, r8, r6
        ms_block:
        bge r10, r6, ms_pass_end
        add r11, r8, r10
        add r12, r11, r7
        blt r12, r13, ms_mid_ok
        mv r12, r13
        ms_mid_ok:
        mv r14, r12
        slli r15, r7, 1
        add r2, r11, r15
        blt r2, r13, ms_end_ok
        mv r2, r13
        ms_end_ok:
        add r3, r9, r10
        """
    )
    emit_merge(b, "ms_m", "r11", "r12", "r14", "r2", "r3", "r5", "r1")
    b.ops(
        """
        slli r15, r7, 1
        add r10, r10, r15
        j ms_block
        ms_pass_end:
        mv r15, r8
        mv r8, r9
        mv r9, r15
        slli r7, r7, 1
        j ms_pass
        ms_finish:
        beq r8, r4, ms_ret
        li r10, 0
        ms_copy:
        bge r10, r6, ms_ret
        add r11, r8, r10
        lw r5, 0(r11)
        add r12, r4, r10
        sw r5, 0(r12)
        addi r10, r10, 4
        j ms_copy
        ms_ret:
        ret
        """
    )
    # merge_halves(a, na, b, nb, out)
    b = p.routine("merge_halves")
    b.ops(
        """
        slli r5, r5, 2
        add r5, r4, r5
        slli r7, r7, 2
        add r7, r6, r7
        """
    )
    emit_merge(b, "mh", "r4", "r5", "r6", "r7", "r8", "r9", "r10")
    b.op("ret")


def build_merge_sort(n: int = 1024, seed: int = 5, values: np.ndarray | None = None, sim: SimConfig | None = None) -> Workload:
    if values is not None:
        keys = np.asarray(values, dtype="<i4")
        n = len(keys)
    else:
        keys = np.random.default_rng(seed).integers(-(2**20), 2**20, n).astype("<i4")
    if n < 2 or n % 2:
        raise WorkloadError(f"merge_sort needs an even n >= 2, got {n}")
    sim = sim or SimConfig()
    half = n // 2

    data = DataImage()
    arr = data.place("keys", keys)
    tmp = data.alloc("scratch", 4 * n)
    out = data.alloc("sorted", 4 * n)

    p = KernelProgram("merge_sort", sim)
    emit_sort_tasks(p)

    def emit_main(b: AsmBuilder, dual: bool) -> None:
        p.parallel(
            b,
            Call("msort", (arr, tmp, half)),
            Call("msort", (arr + 4 * half, tmp + 4 * half, half)),
            dual,
        )
        p.call(b, Call("merge_halves", (arr, half, arr + 4 * half, half, out)))

    program, source = p.build(emit_main)
    expected = np.sort(keys, kind="stable")

    def check(mem) -> list[str]:
        return compare_exact("sorted", read_words(mem, out, n), expected)

    return Workload(
        name="merge_sort",
        sizes={"n": n},
        partitioning="block",
        program=program,
        source=source,
        data=data,
        channel_base=sim.channel_base,
        oracle_id="sorted_permutation",
        check=check,
        notes={"seed": seed},
    )
