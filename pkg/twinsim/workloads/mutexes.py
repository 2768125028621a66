"""Shared counter behind a test-and-test-and-set lock."""

from __future__ import annotations

from ..asm import AsmBuilder
from ..config import SimConfig
from .base import Call, DataImage, KernelProgram, Workload, WorkloadError


def emit_mutex_task(p: KernelProgram, label: str = "mx_count") -> None:
    # mx_count(lock, counter, iterations): a little private work, then one locked increment
    p.task(label).ops(
        f"""
        {label}_loop:
        addi r7, r7, 3
        xor r8, r8, r7
        slli r9, r8, 1
        add r10, r9, r7
        {label}_spin:
        lb r11, 0(r4)
        bne r11, r0, {label}_spin
        tas r11, 0(r4)
        bne r11, r0, {label}_spin
        lw r12, 0(r5)
        addi r12, r12, 1
        sw r12, 0(r5)
        sb r0, 0(r4)
        addi r6, r6, -1
        bne r6, r0, {label}_loop
        ret
        """
    )


def build_mutexes(total: int = 4096, sim: SimConfig | None = None) -> Workload:
    if total < 2 or total % 2:
        raise WorkloadError(f"mutexes needs an even total >= 2, got {total}")
    sim = sim or SimConfig()
    data = DataImage()
    lock = data.alloc("lock", 4)
    counter = data.alloc("counter", 4)
    per_thread = total // 2

    p = KernelProgram("mutexes", sim)
    emit_mutex_task(p)

    def emit_main(b: AsmBuilder, dual: bool) -> None:
        call = Call("mx_count", (lock, counter, per_thread))
        p.parallel(b, call, call, dual)

    program, source = p.build(emit_main)

    def check(mem) -> list[str]:
        problems = []
        count = mem.read_word(counter)
        if count != total:
            problems.append(f"counter = {count}, expected {total}")
        if mem.read_bytes(lock, 1) != b"\0":
            problems.append("lock still held at exit")
        return problems

    return Workload(
        name="mutexes",
        sizes={"total": total},
        partitioning="block",
        program=program,
        source=source,
        data=data,
        channel_base=sim.channel_base,
        oracle_id="counter_total",
        check=check,
        uses_atomics=True,
    )
