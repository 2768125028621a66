"""ECG beat detection and Hermite compression.

Pipeline on one record of 12-bit samples:

1. convert samples to doubles, scattered straight into the FFT input
   layout (split between threads)
2. forward FFT (even/odd halves on the two threads, combine split too)
3. band-pass mask plus conjugation, scattered into the second FFT's input
   (split)
4. forward FFT again; the real part over N is the filtered signal (the
   scaling is split)
5. detection on thread 0: centered derivative, square, centered moving
   average, threshold at half the maximum (with a floor), then the largest
   filtered sample of every region above threshold is a beat
6. Hermite coefficients of a window around the first beat (split by
   coefficient)

The filtered signal and the moving average reuse the first FFT buffer and
the energy sequence reuses the second one. Thread 0 stamps RDCYC between
stages so reports can break the run down.
"""


from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

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
    read_doubles,
    read_words,
)
from .fft import FftBuffer, FftPlan, emit_fft_routines, is_pow2, relative_error

SAMPLE_RATE = 360.0
BAND_HZ = (5.0, 25.0)
WINDOW = 16
THRESHOLD_FLOOR = 100.0
MAX_PEAKS = 8
HERMITE_ORDER = 6
HERMITE_WIDTH = 64
HERMITE_SIGMA = 8.0
PEAK_TOLERANCE = 5
TOLERANCE = 1e-9

STAGES = ("convert", "fft", "filter", "inverse", "detect", "hermite")


# --- host-side signal model ---------------------------------------------


def synth_ecg(
    n: int = 256,
    beats: Sequence[int] | None = None,
    seed: int = 8,
    noise: float = 5.0,
    flat: bool = False,
) -> tuple[np.ndarray, list[int]]:
    """A 12-bit single-lead record and the sample index of each R peak."""
    if flat:
        return np.full(n, 2048, dtype="<i4"), []
    r_peaks = [n // 2] if beats is None else list(beats)
    rng = np.random.default_rng(seed)
    t = np.arange(n, dtype=float)

    def bump(center: float, width: float) -> np.ndarray:
        return np.exp(-0.5 * ((t - center) / width) ** 2)

    sig = 1024.0 + 25.0 * np.sin(2 * np.pi * 0.3 * t / SAMPLE_RATE)
    for r in r_peaks:
        sig += 100.0 * bump(r - 60, 8.0)
        sig -= 80.0 * bump(r - 7, 2.5)
        sig += 900.0 * bump(r, 3.0)
        sig -= 160.0 * bump(r + 7, 3.0)
        sig += 200.0 * bump(r + 80, 14.0)
    sig += rng.normal(0.0, noise, n)
    return np.clip(np.rint(sig), 0, 4095).astype("<i4"), r_peaks


def band_mask(n: int, band: tuple[float, float] = BAND_HZ, rate: float = SAMPLE_RATE) -> np.ndarray:
    k = np.arange(n)
    freq = np.minimum(k, n - k) * rate / n
    return ((freq >= band[0]) & (freq <= band[1])).astype(float)


def hermite_basis(order: int = HERMITE_ORDER, width: int = HERMITE_WIDTH, sigma: float = HERMITE_SIGMA) -> np.ndarray:
    """Orthonormal rows built from the first ``order`` Hermite functions."""
    t = (np.arange(width) - (width - 1) / 2) / sigma
    phi = np.zeros((order, width))
    phi[0] = np.pi**-0.25 * np.exp(-0.5 * t * t)
    if order > 1:
        phi[1] = np.sqrt(2.0) * t * phi[0]
    for k in range(2, order):
        phi[k] = np.sqrt(2.0 / k) * t * phi[k - 1] - np.sqrt((k - 1) / k) * phi[k - 2]
    q, r = np.linalg.qr(phi.T)
    return (q * np.sign(np.diag(r))).T


def reconstruction_errors(window: np.ndarray, basis: np.ndarray, counts: Sequence[int] = range(2, HERMITE_ORDER + 1)) -> list[float]:
    """Residual norm after projecting ``window`` on the first c basis rows."""
    errors = []
    for c in counts:
        coef = basis[:c] @ window
        errors.append(float(np.linalg.norm(window - coef @ basis[:c])))
    return errors


def window_start(peak: int, n: int, width: int = HERMITE_WIDTH) -> int:
    return min(max(peak - width // 2, 0), n - width)


@dataclass
class Detection:
    """Exact host replay of the detection stage."""

    moving_average: np.ndarray
    threshold: float
    peaks: list[int]


def detect(y: np.ndarray, floor: float = THRESHOLD_FLOOR) -> Detection:
    """Replays the kernel's float operations in the same order."""
    n = len(y)
    s_pad = [0.0] * (n + WINDOW)
    for i in range(1, n - 1):
        d = (float(y[i + 1]) - float(y[i - 1])) * 0.5
        s_pad[i + WINDOW // 2] = d * d
    inv_w = 1.0 / WINDOW
    m = [0.0] * n
    total = 0.0
    for j in range(WINDOW):
        total += s_pad[j]
    m[0] = total * inv_w
    for i in range(1, n):
        total = (total + s_pad[i + WINDOW - 1]) - s_pad[i - 1]
        m[i] = total * inv_w
    mx = m[0]
    for v in m[1:]:
        if mx < v:
            mx = v
    thr = mx * 0.5
    if thr < floor:
        thr = floor
    peaks: list[int] = []
    inside = False
    best, best_y = 0, 0.0
    for i in range(n):
        above = thr < m[i]
        if not inside:
            if above:
                inside, best, best_y = True, i, float(y[i])
        elif above:
            if best_y < float(y[i]):
                best, best_y = i, float(y[i])
        else:
            peaks.append(best)
            inside = False
    if inside:
        peaks.append(best)
    return Detection(np.array(m), thr, peaks)


# --- kernels --------------------------------------------------------------


def emit_ecg_tasks(p: KernelProgram) -> None:
    # ecg_convert(samples, buf, offsets, count): sample i to (re, 0.0) at buf + offsets[i]
    p.task("ecg_convert").ops(
        """
        fitod f1, r0
        cv_loop:
        lw r1, 0(r4)
        lw r2, 0(r6)
        fitod f0, r1
        add r2, r2, r5
        addi r4, r4, 4
        addi r6, r6, 4
        fst f0, 0(r2)
        fst f1, 8(r2)
        addi r7, r7, -1
        bne r7, r0, cv_loop
        ret
        """
    )
    # ecg_mask(spec, buf, offsets, flags, count): conj(spec[k] * flag[k]) to buf + offsets[k]
    p.task("ecg_mask").ops(
        """
        fitod f4, r0
        mk_loop:
        fld f0, 0(r4)
        fld f1, 8(r4)
        lb r1, 0(r7)
        lw r2, 0(r6)
        fitod f2, r1
        add r2, r2, r5
        addi r4, r4, 16
        addi r6, r6, 4
        fmul f0, f0, f2
        fmul f1, f1, f2
        addi r7, r7, 1
        fsub f1, f4, f1
        fst f0, 0(r2)
        addi r8, r8, -1
        fst f1, 8(r2)
        bne r8, r0, mk_loop
        ret
        """
    )
    # ecg_scale(spec, y, count, consts): y[k] = re(spec[k]) / N
    p.task("ecg_scale").ops(
        """
        fld f15, 0(r7)
        sc_loop:
        fld f0, 0(r4)
        fmul f0, f0, f15
        addi r4, r4, 16
        addi r6, r6, -1
        fst f0, 0(r5)
        addi r5, r5, 8
        bne r6, r0, sc_loop
        ret
        """
    )
    # ecg_detect(y, s_pad, m, n, consts, peaks) -> r2 = beats, r3 = first beat
    p.routine("ecg_detect").ops(
        f"""
        fld f14, 8(r8)
        fld f13, 16(r8)
        fld f12, 24(r8)
        fitod f4, r0
        mv r11, r5
        li r13, {WINDOW // 2 + 1}
        ed_pad_lo:
        fst f4, 0(r11)
        addi r11, r11, 8
        addi r13, r13, -1
        bne r13, r0, ed_pad_lo
        slli r11, r7, 3
        add r11, r11, r5
        addi r11, r11, {8 * (WINDOW // 2 - 1)}
        li r13, {WINDOW // 2 + 1}
        ed_pad_hi:
        fst f4, 0(r11)
        addi r11, r11, 8
        addi r13, r13, -1
        bne r13, r0, ed_pad_hi
        addi r11, r4, 8
        addi r12, r5, {8 * (WINDOW // 2 + 1)}
        addi r13, r7, -2
        ed_deriv:
        fld f0, 8(r11)
        fld f1, -8(r11)
        fsub f2, f0, f1
        addi r11, r11, 8
        fmul f2, f2, f14
        addi r13, r13, -1
        fmul f3, f2, f2
        fst f3, 0(r12)
        addi r12, r12, 8
        bne r13, r0, ed_deriv
        mv r11, r5
        li r13, {WINDOW}
        ed_sum0:
        fld f0, 0(r11)
        fadd f4, f4, f0
        addi r11, r11, 8
        addi r13, r13, -1
        bne r13, r0, ed_sum0
        fmul f5, f4, f13
        fst f5, 0(r6)
        fld f6, 0(r6)
        addi r11, r5, {8 * WINDOW}
        mv r12, r5
        addi r14, r6, 8
        addi r13, r7, -1
        ed_run:
        fld f0, 0(r11)
        fld f1, 0(r12)
        fadd f4, f4, f0
        addi r11, r11, 8
        addi r12, r12, 8
        fsub f4, f4, f1
        addi r13, r13, -1
        fmul f5, f4, f13
        fst f5, 0(r14)
        flt r15, f6, f5
        beq r15, r0, ed_keep
        fld f6, 0(r14)
        ed_keep:
        addi r14, r14, 8
        bne r13, r0, ed_run
        fmul f7, f6, f14
        flt r15, f7, f12
        beq r15, r0, ed_thr_ok
        fld f7, 24(r8)
        ed_thr_ok:
        mv r11, r6
        mv r12, r4
        li r13, 0
        li r14, 0
        li r15, 0
        addi r3, r9, 4
        ed_scan:
        fld f0, 0(r11)
        flt r1, f7, f0
        bne r14, r0, ed_in
        beq r1, r0, ed_step
        li r14, 1
        mv r10, r13
        fld f9, 0(r12)
        j ed_step
        ed_in:
        beq r1, r0, ed_close
        fld f1, 0(r12)
        flt r1, f9, f1
        beq r1, r0, ed_step
        mv r10, r13
        fld f9, 0(r12)
        j ed_step
        ed_close:
        slti r1, r15, {MAX_PEAKS}
        beq r1, r0, ed_closed
        sw r10, 0(r3)
        addi r3, r3, 4
        ed_closed:
        addi r15, r15, 1
        li r14, 0
        ed_step:
        addi r11, r11, 8
        addi r12, r12, 8
        addi r13, r13, 1
        blt r13, r7, ed_scan
        beq r14, r0, ed_end
        slti r1, r15, {MAX_PEAKS}
        beq r1, r0, ed_tail_count
        sw r10, 0(r3)
        ed_tail_count:
        addi r15, r15, 1
        ed_end:
        sw r15, 0(r9)
        mv r2, r15
        lw r3, 4(r9)
        ret
        """
    )
    # ecg_hermite(window, basis_rows, count, out): count dot products of length HERMITE_WIDTH
    p.task("ecg_hermite").ops(
        f"""
        hm_row:
        fitod f0, r0
        mv r8, r4
        li r9, {HERMITE_WIDTH}
        hm_loop:
        fld f1, 0(r8)
        fld f2, 0(r5)
        fmul f3, f1, f2
        addi r8, r8, 8
        addi r5, r5, 8
        fadd f0, f0, f3
        addi r9, r9, -1
        bne r9, r0, hm_loop
        fst f0, 0(r7)
        addi r7, r7, 8
        addi r6, r6, -1
        bne r6, r0, hm_row
        ret
        """
    )


def build_ecg(
    n: int = 256,
    beats: Sequence[int] | None = None,
    seed: int = 8,
    flat: bool = False,
    samples: np.ndarray | None = None,
    sim: SimConfig | None = None,
) -> Workload:
    if samples is not None:
        n = len(samples)
    if not is_pow2(n) or n < HERMITE_WIDTH:
        raise WorkloadError(f"ecg needs a power-of-two record of at least {HERMITE_WIDTH} samples, got {n}")
    if samples is not None:
        record = np.asarray(samples, dtype="<i4")
        truth: list[int] = list(beats or [])
    else:
        record, truth = synth_ecg(n, beats, seed, flat=flat)
    if np.any((record < 0) | (record > 4095)):
        raise WorkloadError("ecg samples must be 12-bit")
    sim = sim or SimConfig()
    way_bytes = sim.dcache.size_bytes // sim.dcache.associativity
    half = n // 2
    mask = band_mask(n)
    basis = hermite_basis()
    rows = HERMITE_ORDER // 2
    row_bytes = 8 * HERMITE_WIDTH

    data = DataImage()
    samples_addr = data.place("samples", record)
    plan = FftPlan.place(data, n)
    x = FftBuffer.place(data, "signal", n, way_bytes=way_bytes)
    x2 = FftBuffer.place(data, "masked", n, way_bytes=way_bytes)
    offsets = data.place("input_offsets", x.input_offsets().astype("<i4"))
    flags = data.place("band", mask.astype("<i1"))
    consts = data.place("constants", np.array([1.0 / n, 0.5, 1.0 / WINDOW, THRESHOLD_FLOOR], dtype="<f8"))
    peaks = data.alloc("peaks", 4 * (1 + MAX_PEAKS))
    basis_addr = data.place("hermite_basis", basis.astype("<f8"))
    coef = data.alloc("coefficients", 8 * HERMITE_ORDER)
    stamps = data.alloc("stage_stamps", 4 * (len(STAGES) + 1))
    # dead buffers: y and the moving average in the first, the energy in the second
    y, mavg, s_pad = x.even, x.odd, x2.base

    p = KernelProgram("ecg", sim)
    emit_fft_routines(p)
    emit_ecg_tasks(p)

    def stamp(b: AsmBuilder, index: int) -> None:
        b.op("rdcyc r19")
        b.op(f"sw r19, {4 * index}(r16)")

    def emit_main(b: AsmBuilder, dual: bool) -> None:
        b.op(f"li r16, {stamps:#x}")
        stamp(b, 0)
        p.parallel(
            b,
            Call("ecg_convert", (samples_addr, x.base, offsets, half)),
            Call("ecg_convert", (samples_addr + 4 * half, x.base, offsets + 4 * half, half)),
            dual,
        )
        stamp(b, 1)
        plan.emit(p, b, x, dual, split_combine=True)
        stamp(b, 2)
        p.parallel(
            b,
            Call("ecg_mask", (x.even, x2.base, offsets, flags, half)),
            Call("ecg_mask", (x.odd, x2.base, offsets + 4 * half, flags + half, half)),
            dual,
        )
        stamp(b, 3)
        plan.emit(p, b, x2, dual, split_combine=True)
        p.parallel(
            b,
            Call("ecg_scale", (x2.even, y, half, consts)),
            Call("ecg_scale", (x2.odd, y + 8 * half, half, consts)),
            dual,
        )
        stamp(b, 4)
        p.call(b, Call("ecg_detect", (y, s_pad, mavg, n, consts, peaks)))
        stamp(b, 5)
        skip = b.unique("ecg_no_beat")
        low_ok = b.unique("ecg_win_lo")
        high_ok = b.unique("ecg_win_hi")
        b.ops(
            f"""
            beq r2, r0, {skip}
            addi r17, r3, -{HERMITE_WIDTH // 2}
            bge r17, r0, {low_ok}
            li r17, 0
            {low_ok}:
            li r18, {n - HERMITE_WIDTH}
            blt r17, r18, {high_ok}
            mv r17, r18
            {high_ok}:
            slli r17, r17, 3
            li r18, {y:#x}
            add r17, r17, r18
            """
        )
        p.parallel(
            b,
            Call("ecg_hermite", ("r17", basis_addr + rows * row_bytes, HERMITE_ORDER - rows, coef + 8 * rows)),
            Call("ecg_hermite", ("r17", basis_addr, rows, coef)),
            dual,
        )
        b.label(skip)
        stamp(b, 6)

    program, source = p.build(emit_main)
    reference_y = np.real(np.fft.ifft(np.fft.fft(record.astype(float)) * mask))

    def check(mem) -> list[str]:
        y_sim = read_doubles(mem, y, n)
        err = relative_error(y_sim, reference_y)
        if err > TOLERANCE:
            return [f"filtered signal relative error {err:.3e} exceeds {TOLERANCE:g}"]
        replay = detect(y_sim)
        problems = compare_exact("moving_average", read_doubles(mem, mavg, n), replay.moving_average)
        count = int(read_words(mem, peaks, 1)[0])
        found = [int(v) for v in read_words(mem, peaks + 4, min(count, MAX_PEAKS))]
        if count != len(replay.peaks) or found != replay.peaks[:MAX_PEAKS]:
            problems.append(f"detected beats {found} (count {count}), replay gives {replay.peaks}")
        if not count:
            problems.append("no QRS complex detected")
            return problems
        for r in truth:
            if not any(abs(r - f) <= PEAK_TOLERANCE for f in found):
                problems.append(f"beat at sample {r} missed (found {found})")
        if truth and count != len(truth):
            problems.append(f"{count} beats detected, record has {len(truth)}")
        start = window_start(found[0], n)
        window = y_sim[start : start + HERMITE_WIDTH]
        want = np.array([sum_products(window, row) for row in basis])
        problems += compare_exact("coefficients", read_doubles(mem, coef, HERMITE_ORDER), want)
        return problems

    def report(mem) -> dict:
        t = [int(v) for v in read_words(mem, stamps, len(STAGES) + 1, signed=False)]
        count = int(read_words(mem, peaks, 1)[0])
        found = [int(v) for v in read_words(mem, peaks + 4, min(count, MAX_PEAKS))]
        out: dict = {
            "stages": {name: t[i + 1] - t[i] for i, name in enumerate(STAGES)},
            "beats": found,
        }
        if found:
            y_sim = read_doubles(mem, y, n)
            start = window_start(found[0], n)
            out["coefficients"] = [float(v) for v in read_doubles(mem, coef, HERMITE_ORDER)]
            out["reconstruction_error"] = reconstruction_errors(y_sim[start : start + HERMITE_WIDTH], basis)
        return out

    return Workload(
        name="ecg",
        sizes={"n": n},
        partitioning="interleaved",
        program=program,
        source=source,
        data=data,
        channel_base=sim.channel_base,
        oracle_id="ecg_pipeline",
        check=check,
        report=report,
        notes={
            "seed": seed,
            "beats": truth,
            "sample_rate": SAMPLE_RATE,
            "band_hz": list(BAND_HZ),
            "window": WINDOW,
            "threshold_floor": THRESHOLD_FLOOR,
            "hermite_order": HERMITE_ORDER,
        },
    )


def sum_products(a: np.ndarray, b: np.ndarray) -> float:
    total = 0.0
    for u, v in zip(a, b, strict=True):
        total += float(u) * float(v)
    return total


__all__ = [
    "STAGES",
    "Detection",
    "band_mask",
    "build_ecg",
    "detect",
    "hermite_basis",
    "reconstruction_errors",
    "synth_ecg",
    "window_start",
]
