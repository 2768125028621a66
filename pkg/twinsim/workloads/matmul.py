"""Dense double-precision matrix multiply, rows split odd/even."""

from __future__ import annotations

import numpy as np

from ..asm import AsmBuilder
from ..config import SimConfig
from .base import Call, DataImage, KernelProgram, Workload, WorkloadError, compare_exact, read_doubles

BLOCK = 8  # columns of C per sweep over this thread's rows
PAD = 8  # extra doubles per row so consecutive rows start in different sets
ROW_STEP = 2  # rows of one thread are i0, i0 + 2, ...


def emit_rows_task(p: KernelProgram, ld: int) -> None:
    """mm_rows(i0, n, A, BT, C): rows i0, i0+2, ... of C, with BT = B transposed.

    Each inner loop keeps four dot products in registers: rows i and i+2 of
    A against rows j and j+1 of BT. Column blocks are the outer loop so the
    block of BT stays resident while every row of this thread sweeps over it.
    """
    row = 8 * ld
    pair = ROW_STEP * row
    b = p.task("mm_rows")
    b.ops(
        f"""
        li r13, 0
        mm_jb:
        mv r11, r4
        mm_i:
        li r12, {row}
        mul r12, r11, r12
        add r12, r12, r6
        mv r3, r13
        mm_j:
        mv r14, r12
        slli r1, r5, 3
        add r1, r1, r12
        li r15, {row}
        mul r15, r3, r15
        add r15, r15, r7
        fitod f10, r0
        fitod f11, r0
        fitod f12, r0
        fitod f13, r0
        mm_k:
        fld f2, 0(r14)
        fld f4, 0(r15)
        fld f3, {pair}(r14)
        fmul f6, f2, f4
        fld f5, {row}(r15)
        fmul f7, f3, f4
        fmul f8, f2, f5
        fmul f9, f3, f5
        fadd f10, f10, f6
        fadd f11, f11, f7
        fadd f12, f12, f8
        fadd f13, f13, f9
        addi r14, r14, 8
        addi r15, r15, 8
        bne r14, r1, mm_k
        li r2, {row}
        mul r2, r11, r2
        add r2, r2, r8
        slli r14, r3, 3
        add r2, r2, r14
        fst f10, 0(r2)
        fst f12, 8(r2)
        fst f11, {pair}(r2)
        fst f13, {pair + 8}(r2)
        addi r3, r3, 2
        addi r14, r13, {BLOCK}
        blt r3, r14, mm_j
        addi r11, r11, {2 * ROW_STEP}
        blt r11, r5, mm_i
        addi r13, r13, {BLOCK}
        blt r13, r5, mm_jb
        ret
        """
    )


def reference(a: np.ndarray, bm: np.ndarray) -> np.ndarray:
    """Row-by-row accumulation over k, the order the kernel adds in."""
    n = a.shape[0]
    c = np.zeros((n, n))
    for k in range(n):
        c += a[:, k : k + 1] * bm[k : k + 1, :]
    return c


def build_matmul(n: int = 128, seed: int = 1, sim: SimConfig | None = None) -> Workload:
    if n < BLOCK or n % BLOCK:
        raise WorkloadError(f"matrix_mult needs n a positive multiple of {BLOCK}, got {n}")
    ld = n + PAD
    if 8 * (ROW_STEP * ld + 1) > 0x7FFF:
        raise WorkloadError(f"matrix_mult rows of {n} doubles exceed the load offset range")
    sim = sim or SimConfig()
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, (n, n))
    bm = rng.uniform(-1.0, 1.0, (n, n))

    def padded(m: np.ndarray) -> np.ndarray:
        out = np.zeros((n, ld))
        out[:, :n] = m
        return out

    data = DataImage()
    a_addr = data.place("A", padded(a).astype("<f8"))
    bt_addr = data.place("BT", padded(bm.T).astype("<f8"))
    c_addr = data.alloc("C", 8 * n * ld)

    p = KernelProgram("matrix_mult", sim)
    emit_rows_task(p, ld)

    def args(first_row: int) -> tuple[int, ...]:
        return (first_row, n, a_addr, bt_addr, c_addr)

    def emit_main(b: AsmBuilder, dual: bool) -> None:
        p.parallel(b, Call("mm_rows", args(1)), Call("mm_rows", args(0)), dual)

    program, source = p.build(emit_main)
    expected = reference(a, bm)

    def check(mem) -> list[str]:
        got = read_doubles(mem, c_addr, n * ld).reshape(n, ld)[:, :n]
        return compare_exact("C", got, expected)

    return Workload(
        name="matrix_mult",
        sizes={"n": n},
        partitioning="interleaved",
        program=program,
        source=source,
        data=data,
        channel_base=sim.channel_base,
        oracle_id="matmul_exact",
        check=check,
        notes={"seed": seed, "row_stride_doubles": ld, "column_block": BLOCK},
    )
