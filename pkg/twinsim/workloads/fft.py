"""Radix-2 complex FFT split into even/odd halves plus a combine pass.

Transforms run in place. The host stores the even-indexed samples in
bit-reversed order, then, half a cache way further on, the odd-indexed
ones. Each half runs its short butterfly stages block by block (a block
fits in the data cache), then the remaining long stages over the whole
half. The combine pass leaves the spectrum in natural order: bins below
n/2 in the even half, the rest in the odd half. Twiddle factors are never
tabulated; each stage rotates a register pair by one per-stage step.
Complex values are stored as (re, im) double pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..asm import AsmBuilder
from ..config import SimConfig
from .base import Call, DataImage, KernelProgram, Workload, WorkloadError, read_doubles

BLOCK_POINTS = 512
TOLERANCE = 1e-9
# Up to this size the oracle is the direct O(n^2) transform.
DIRECT_DFT_MAX = 256

HALF_TASK = "fft_half"
STAGE_ROUTINE = "fft_stage"
COMBINE_TASK = "fft_combine"

# butterfly on A=r15, B=r1 with w in f0/f1 and the stage step in f14/f15;
# leaves A+wB in A, A-wB in B and w*step in f0/f1
_BUTTERFLY = """
fld f4, 0(r1)
fld f5, 8(r1)
fld f2, 0(r15)
fmul f6, f0, f4
fmul f7, f1, f5
fld f3, 8(r15)
fmul f8, f0, f5
fmul f9, f1, f4
fsub f6, f6, f7
fadd f8, f8, f9
fmul f10, f0, f14
fmul f11, f1, f15
fadd f12, f2, f6
fsub f13, f2, f6
fst f12, 0(r15)
fst f13, 0(r1)
fadd f12, f3, f8
fsub f13, f3, f8
fst f12, 8(r15)
fst f13, 8(r1)
fmul f6, f0, f15
fmul f7, f1, f14
fsub f0, f10, f11
fadd f1, f6, f7
"""


def is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def log2(n: int) -> int:
    return n.bit_length() - 1


def stage_steps(n: int) -> np.ndarray:
    """Rotation per butterfly for each stage: entry t serves spans of 2**t points."""
    return np.exp(-1j * np.pi / (2.0 ** np.arange(log2(n))))


def bit_reverse(length: int) -> np.ndarray:
    bits = length.bit_length() - 1
    idx = np.arange(length)
    rev = np.zeros(length, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def pack_complex(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.complex128)
    return np.column_stack((values.real, values.imag)).astype("<f8")


def read_complex(mem, addr: int, count: int) -> np.ndarray:
    pairs = read_doubles(mem, addr, 2 * count).reshape(count, 2)
    return pairs[:, 0] + 1j * pairs[:, 1]


def direct_dft(x: np.ndarray) -> np.ndarray:
    n = len(x)
    k = np.arange(n)
    return np.exp(-2j * np.pi * (np.outer(k, k) % n) / n) @ x


def relative_error(got: np.ndarray, want: np.ndarray) -> float:
    """Largest absolute error relative to the largest reference magnitude (at least 1)."""
    scale = max(1.0, float(np.max(np.abs(want))))
    return float(np.max(np.abs(got - want))) / scale


def emit_fft_routines(p: KernelProgram) -> None:
    # fft_stage(step=r8, span=r11 bytes, start=r12, end=r13); keeps r4..r13
    p.routine(STAGE_ROUTINE).ops(
        f"""
        fld f14, 0(r8)
        fld f15, 8(r8)
        slli r3, r11, 1
        mv r14, r12
        st_group:
        bge r14, r13, st_done
        li r1, 1
        fitod f0, r1
        fitod f1, r0
        mv r15, r14
        add r2, r14, r11
        st_bfly:
        add r1, r15, r11
        {_BUTTERFLY}
        addi r15, r15, 16
        blt r15, r2, st_bfly
        add r14, r14, r3
        j st_group
        st_done:
        ret
        """
    )
    # fft_half(buf, L, steps, block): in-place FFT of L bit-reversed points
    p.task(HALF_TASK).ops(
        f"""
        mv r10, r31
        slli r9, r5, 4
        add r9, r9, r4
        slli r7, r7, 4
        sub r2, r9, r4
        bge r2, r7, fh_clamped
        mv r7, r2
        fh_clamped:
        mv r12, r4
        fh_block:
        bge r12, r9, fh_large
        add r13, r12, r7
        li r11, 16
        mv r8, r6
        fh_small:
        bge r11, r7, fh_next
        call {STAGE_ROUTINE}
        slli r11, r11, 1
        addi r8, r8, 16
        j fh_small
        fh_next:
        mv r12, r13
        j fh_block
        fh_large:
        mv r12, r4
        mv r13, r9
        fh_large_loop:
        sub r2, r9, r4
        bge r11, r2, fh_done
        call {STAGE_ROUTINE}
        slli r11, r11, 1
        addi r8, r8, 16
        j fh_large_loop
        fh_done:
        mv r31, r10
        ret
        """
    )
    # fft_combine(a, b, count, step, w0): count butterflies between a[k] and b[k]
    p.task(COMBINE_TASK).ops(
        f"""
        fld f14, 0(r7)
        fld f15, 8(r7)
        fld f0, 0(r8)
        fld f1, 8(r8)
        slli r6, r6, 4
        add r6, r6, r4
        sub r9, r5, r4
        mv r15, r4
        fc_loop:
        add r1, r15, r9
        {_BUTTERFLY}
        addi r15, r15, 16
        blt r15, r6, fc_loop
        ret
        """
    )


@dataclass(frozen=True)
class FftBuffer:
    """One in-place transform buffer of ``n`` complex points.

    Split buffers keep the even half at ``base`` and the odd half at
    ``base + odd_offset``.
    """

    n: int
    base: int
    split: bool = True
    odd_offset: int = 0

    @classmethod
    def place(
        cls,
        data: DataImage,
        name: str,
        n: int,
        split: bool = True,
        way_bytes: int = 8192,
        values: np.ndarray | None = None,
    ) -> FftBuffer:
        check_size(n, split)
        odd_offset = 0
        size = 16 * n
        if split:
            half_bytes = 8 * n
            # the odd half starts half a way after the even one, modulo the way
            odd_offset = half_bytes + (way_bytes // 2 - half_bytes) % way_bytes
            size = odd_offset + half_bytes
        layout = cls(n, 0, split, odd_offset)
        if values is None:
            base = data.alloc(name, size)
        else:
            base = data.place(name, layout.arrange(values, size))
        return cls(n, base, split, odd_offset)

    @property
    def half(self) -> int:
        return self.n // 2 if self.split else self.n

    @property
    def even(self) -> int:
        return self.base

    @property
    def odd(self) -> int:
        return self.base + self.odd_offset

    @property
    def size(self) -> int:
        return self.odd_offset + 16 * self.half if self.split else 16 * self.n

    def input_offsets(self) -> np.ndarray:
        """Byte offset from ``base`` where input sample i goes."""
        i = np.arange(self.n)
        if not self.split:
            return 16 * bit_reverse(self.n)[i]
        return (i % 2) * self.odd_offset + 16 * bit_reverse(self.half)[i // 2]

    def output_offsets(self) -> np.ndarray:
        """Byte offset from ``base`` where spectrum bin k ends up."""
        k = np.arange(self.n)
        return (k // self.half) * self.odd_offset + 16 * (k % self.half)

    def arrange(self, values: np.ndarray, size: int | None = None) -> np.ndarray:
        values = np.asarray(values, dtype=np.complex128)
        image = np.zeros((size or self.size) // 8, dtype="<f8")
        slots = self.input_offsets() // 8
        image[slots] = values.real
        image[slots + 1] = values.imag
        return image

    def read(self, mem) -> np.ndarray:
        image = read_doubles(mem, self.base, self.size // 8)
        slots = self.output_offsets() // 8
        return image[slots] + 1j * image[slots + 1]


def check_size(n: int, split: bool) -> None:
    if not is_pow2(n) or n < (4 if split else 2):
        raise WorkloadError(f"FFT size must be a power of two >= {4 if split else 2}, got {n}")


@dataclass(frozen=True)
class FftPlan:
    """Placed constants for transforms of up to ``n`` points."""

    n: int
    steps: int
    starts: int
    block: int

    @classmethod
    def place(cls, data: DataImage, n: int, block: int = BLOCK_POINTS, prefix: str = "fft") -> FftPlan:
        if not is_pow2(block) or block < 2:
            raise WorkloadError(f"FFT block must be a power of two >= 2, got {block}")
        steps = data.place(f"{prefix}_steps", pack_complex(stage_steps(n)))
        # w = 1 and w = -i: where the two combine quarters start
        starts = data.place(f"{prefix}_starts", pack_complex(np.array([1.0, -1j])))
        return cls(n, steps, starts, block)

    def step(self, points: int) -> int:
        return self.steps + 16 * log2(points)

    def emit(self, p: KernelProgram, b: AsmBuilder, buf: FftBuffer, dual: bool, split_combine: bool = False) -> None:
        """Transform ``buf`` in place; ``split_combine`` shares the combine between threads."""
        if buf.n > self.n:
            raise WorkloadError(f"FFT plan for {self.n} points cannot transform {buf.n}")
        if not buf.split:
            p.call(b, Call(HALF_TASK, (buf.base, buf.n, self.steps, self.block)))
            return
        half = buf.half
        p.parallel(
            b,
            Call(HALF_TASK, (buf.even, half, self.steps, self.block)),
            Call(HALF_TASK, (buf.odd, half, self.steps, self.block)),
            dual,
        )
        step = self.step(half)
        if not split_combine:
            p.call(b, Call(COMBINE_TASK, (buf.even, buf.odd, half, step, self.starts)))
            return
        quarter = half // 2
        p.parallel(
            b,
            Call(COMBINE_TASK, (buf.even, buf.odd, quarter, step, self.starts)),
            Call(COMBINE_TASK, (buf.even + 16 * quarter, buf.odd + 16 * quarter, quarter, step, self.starts + 16)),
            dual,
        )


def read_spectrum(workload: Workload, mem) -> np.ndarray:
    """The spectrum an ``fft`` workload left in memory, in natural order."""
    buf = FftBuffer(
        workload.sizes["n"],
        workload.data["fft_data"],
        workload.notes["split"],
        workload.notes["odd_offset"],
    )
    return buf.read(mem)


def build_fft(
    n: int = 4096,
    seed: int = 7,
    split: bool = True,
    block: int = BLOCK_POINTS,
    signal: np.ndarray | None = None,
    sim: SimConfig | None = None,
) -> Workload:
    if signal is not None:
        x = np.asarray(signal, dtype=np.complex128)
        n = len(x)
    else:
        rng = np.random.default_rng(seed)
        x = rng.uniform(-1.0, 1.0, n) + 1j * rng.uniform(-1.0, 1.0, n)
    check_size(n, split)
    sim = sim or SimConfig()
    way_bytes = sim.dcache.size_bytes // sim.dcache.associativity

    data = DataImage()
    plan = FftPlan.place(data, n, block)
    buf = FftBuffer.place(data, "fft_data", n, split, way_bytes, values=x)

    p = KernelProgram("fft", sim)
    emit_fft_routines(p)

    def emit_main(b: AsmBuilder, dual: bool) -> None:
        plan.emit(p, b, buf, dual)

    program, source = p.build(emit_main)
    direct = n <= DIRECT_DFT_MAX
    expected = direct_dft(x) if direct else np.fft.fft(x)

    def check(mem) -> list[str]:
        err = relative_error(buf.read(mem), expected)
        return [] if err <= TOLERANCE else [f"spectrum relative error {err:.3e} exceeds {TOLERANCE:g}"]

    return Workload(
        name="fft",
        sizes={"n": n},
        partitioning="interleaved" if split else "none",
        program=program,
        source=source,
        data=data,
        channel_base=sim.channel_base,
        oracle_id="direct_dft" if direct else "numpy_fft",
        check=check,
        notes={
            "seed": seed,
            "split": split,
            "block": block,
            "tolerance": TOLERANCE,
            "odd_offset": buf.odd_offset,
        },
    )
