"""Name -> builder table for the benchmark suite."""

from __future__ import annotations

import inspect
from collections.abc import Callable, Mapping
from dataclasses import dataclass

from ..config import SimConfig
from .base import Workload, WorkloadError
from .bellman_ford import build_bellman_ford
from .daxpy import build_daxpy
from .dotprod import build_dot_product
from .ecg import build_ecg
from .fft import build_fft
from .matmul import build_matmul
from .memcopy import build_mem_copy
from .mergesort import build_merge_sort
from .mutexes import build_mutexes


@dataclass(frozen=True)
class WorkloadSpec:
    name: str
    builder: Callable[..., Workload]
    defaults: dict[str, int]
    quick: dict[str, int]
    description: str

    @property
    def seeded(self) -> bool:
        """Whether the builder draws its inputs from a seed."""
        return "seed" in inspect.signature(self.builder).parameters


REGISTRY: dict[str, WorkloadSpec] = {
    spec.name: spec
    for spec in (
        WorkloadSpec("matrix_mult", build_matmul, {"n": 128}, {"n": 16}, "C = A x B, odd/even rows"),
        WorkloadSpec("dot_product", build_dot_product, {"n": 1024, "reps": 16}, {"n": 64, "reps": 2}, "x . y, odd/even elements"),
        WorkloadSpec("fft", build_fft, {"n": 4096}, {"n": 64}, "complex FFT, even/odd halves + combine"),
        WorkloadSpec("merge_sort", build_merge_sort, {"n": 1024}, {"n": 64}, "bottom-up sort per half + final merge"),
        WorkloadSpec("bellman_ford", build_bellman_ford, {"nodes": 64, "edges": 128}, {"nodes": 8, "edges": 16}, "all-pairs shortest paths by source"),
        WorkloadSpec("daxpy", build_daxpy, {"n": 1024}, {"n": 64}, "y = a*x + y, two blocks"),
        WorkloadSpec("mem_copy", build_mem_copy, {"nbytes": 32 * 1024}, {"nbytes": 2048}, "strided word copy, column split"),
        WorkloadSpec("mutexes", build_mutexes, {"total": 4096}, {"total": 64}, "TTAS-locked shared counter"),
        WorkloadSpec("ecg", build_ecg, {"n": 256}, {"n": 256}, "band-pass, beat detection, Hermite fit"),
    )
}

SUITE = tuple(REGISTRY)


def parse_sizes(items: list[str] | tuple[str, ...]) -> dict[str, int]:
    """``["n=64", "reps=2"]`` -> ``{"n": 64, "reps": 2}``."""
    sizes: dict[str, int] = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise WorkloadError(f"size override {item!r} is not key=value")
        try:
            sizes[key.strip()] = int(value.strip(), 0)
        except ValueError:
            raise WorkloadError(f"size {key.strip()!r} needs an integer, got {value.strip()!r}") from None
    return sizes


def build(
    name: str,
    sizes: Mapping[str, int] | None = None,
    sim: SimConfig | None = None,
    quick: bool = False,
) -> Workload:
    """Build a registered workload, overriding its default sizes."""
    try:
        spec = REGISTRY[name]
    except KeyError:
        known = ", ".join(SUITE)
        raise WorkloadError(f"unknown workload {name!r} (known: {known})") from None
    params: dict[str, int] = dict(spec.quick if quick else spec.defaults)
    for key, value in (sizes or {}).items():
        if key == "seed" and not spec.seeded:
            continue
        if key not in spec.defaults and key != "seed":
            raise WorkloadError(f"{name} has no size {key!r} (sizes: {', '.join(spec.defaults)})")
        params[key] = value
    return spec.builder(sim=sim, **params)
