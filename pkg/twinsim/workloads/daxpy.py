"""y <- a*x + y over double vectors, split into two contiguous blocks."""

from __future__ import annotations

import numpy as np

from ..asm import AsmBuilder
from ..config import SimConfig
from .base import Call, DataImage, KernelProgram, Workload, WorkloadError, compare_exact, read_doubles


def emit_daxpy_task(p: KernelProgram) -> None:
    # daxpy_block(x, y, count, &a); count is even
    p.task("daxpy_block").ops(
        """
        fld f1, 0(r7)
        srli r6, r6, 1
        daxpy_loop:
        fld f2, 0(r4)
        fld f3, 0(r5)
        fld f6, 8(r4)
        fld f7, 8(r5)
        fmul f2, f1, f2
        fmul f6, f1, f6
        fadd f3, f3, f2
        fadd f7, f7, f6
        fst f3, 0(r5)
        fst f7, 8(r5)
        addi r4, r4, 16
        addi r5, r5, 16
        addi r6, r6, -1
        bne r6, r0, daxpy_loop
        ret
        """
    )


def build_daxpy(n: int = 1024, seed: int = 3, alpha: float | None = None, sim: SimConfig | None = None) -> Workload:
    if n < 4 or n % 4:
        raise WorkloadError(f"daxpy needs n a multiple of 4, got {n}")
    sim = sim or SimConfig()
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, n)
    y = rng.uniform(-1.0, 1.0, n)
    a = float(rng.uniform(0.5, 2.0)) if alpha is None else float(alpha)

    data = DataImage()
    a_addr = data.place("a", np.array([a], dtype="<f8"))
    x_addr = data.place("x", x.astype("<f8"))
    y_addr = data.place("y", y.astype("<f8"))
    half = n // 2

    p = KernelProgram("daxpy", sim)
    emit_daxpy_task(p)

    def emit_main(b: AsmBuilder, dual: bool) -> None:
        p.parallel(
            b,
            Call("daxpy_block", (x_addr, y_addr, half, a_addr)),
            Call("daxpy_block", (x_addr + 8 * half, y_addr + 8 * half, half, a_addr)),
            dual,
        )

    program, source = p.build(emit_main)
    expected = a * x + y

    def check(mem) -> list[str]:
        return compare_exact("y", read_doubles(mem, y_addr, n), expected)

    return Workload(
        name="daxpy",
        sizes={"n": n},
        partitioning="block",
        program=program,
        source=source,
        data=data,
        channel_base=sim.channel_base,
        oracle_id="daxpy_exact",
        check=check,
        notes={"seed": seed, "a": a},
    )
