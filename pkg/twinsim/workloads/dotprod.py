"""Repeated dot product of two double vectors, elements split odd/even."""

from __future__ import annotations

import numpy as np

from ..asm import AsmBuilder
from ..config import SimConfig
from .base import (
    Call,
    DataImage,
    KernelProgram,
    Workload,
    WorkloadError,
    compare_exact,
    emit_counted_loop,
    read_doubles,
)


def emit_dot_tasks(p: KernelProgram) -> None:
    # dot_part(x, y, first, count, out): strided partial sum over every other element
    p.task("dot_part").ops(
        """
        slli r12, r6, 3
        add r13, r4, r12
        add r14, r5, r12
        mv r15, r7
        fitod f0, r0
        dot_loop:
        fld f1, 0(r13)
        fld f2, 0(r14)
        fmul f3, f1, f2
        addi r13, r13, 16
        addi r14, r14, 16
        fadd f0, f0, f3
        addi r15, r15, -1
        bne r15, r0, dot_loop
        fst f0, 0(r8)
        ret
        """
    )
    # dot_combine(partials, out)
    p.routine("dot_combine").ops(
        """
        fld f1, 0(r4)
        fld f2, 8(r4)
        fadd f3, f1, f2
        fst f3, 0(r5)
        ret
        """
    )


def strided_sum(x: np.ndarray, y: np.ndarray, first: int) -> float:
    total = 0.0
    for i in range(first, len(x), 2):
        total += float(x[i]) * float(y[i])
    return total


def build_dot_product(n: int = 1024, reps: int = 16, seed: int = 2, sim: SimConfig | None = None) -> Workload:
    if n < 2 or n % 2:
        raise WorkloadError(f"dot_product needs an even n >= 2, got {n}")
    if reps < 1:
        raise WorkloadError("dot_product needs reps >= 1")
    sim = sim or SimConfig()
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, n)
    y = rng.uniform(-1.0, 1.0, n)

    data = DataImage()
    x_addr = data.place("x", x.astype("<f8"))
    y_addr = data.place("y", y.astype("<f8"))
    partials = data.alloc("partials", 16)
    out = data.alloc("result", 8)
    half = n // 2

    p = KernelProgram("dot_product", sim)
    emit_dot_tasks(p)

    def emit_main(b: AsmBuilder, dual: bool) -> None:
        def body() -> None:
            p.parallel(
                b,
                Call("dot_part", (x_addr, y_addr, 1, half, partials)),
                Call("dot_part", (x_addr, y_addr, 0, half, partials + 8)),
                dual,
            )
            p.call(b, Call("dot_combine", (partials, out)))

        emit_counted_loop(b, "r16", reps, body, "dot_rep")

    program, source = p.build(emit_main)
    odd = strided_sum(x, y, 1)
    even = strided_sum(x, y, 0)
    expected = np.array([odd, even, odd + even])

    def check(mem) -> list[str]:
        got = np.concatenate([read_doubles(mem, partials, 2), read_doubles(mem, out, 1)])
        return compare_exact("dot", got, expected)

    return Workload(
        name="dot_product",
        sizes={"n": n, "reps": reps},
        partitioning="interleaved",
        program=program,
        source=source,
        data=data,
        channel_base=sim.channel_base,
        oracle_id="dot_exact",
        check=check,
        notes={"seed": seed},
    )
