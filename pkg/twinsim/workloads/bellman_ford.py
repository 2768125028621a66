"""All-pairs shortest paths by one Bellman-Ford pass per source.

Sources are split odd/even between the threads. Weights are positive, so
an unreachable distance (INF) plus any weight never relaxes anything and
the kernel needs no overflow test.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from ..asm import AsmBuilder
from ..config import SimConfig
from .base import Call, DataImage, KernelProgram, Workload, WorkloadError, compare_exact, read_words

INF = 0x3FFF_FFFF
MAX_WEIGHT = 16

Edge = tuple[int, int, int]


def emit_bf_task(p: KernelProgram) -> None:
    # bf_sources(first, step, V, E, edges, dist); edges hold (4u, 4v, w) triples
    p.task("bf_sources").ops(
        f"""
        mv r10, r4
        bf_src:
        bge r10, r6, bf_done
        mul r11, r10, r6
        slli r11, r11, 2
        add r11, r11, r9
        li r12, {INF:#x}
        li r13, 0
        slli r14, r6, 2
        bf_init:
        add r15, r11, r13
        sw r12, 0(r15)
        addi r13, r13, 4
        blt r13, r14, bf_init
        slli r15, r10, 2
        add r15, r15, r11
        sw r0, 0(r15)
        addi r2, r6, -1
        bf_iter:
        beq r2, r0, bf_next
        li r3, 0
        mv r12, r8
        mv r13, r7
        bf_edge:
        lw r14, 0(r12)
        lw r15, 4(r12)
        lw r4, 8(r12)
        add r14, r14, r11
        lw r14, 0(r14)
        add r15, r15, r11
        lw r1, 0(r15)
        add r14, r14, r4
        bge r14, r1, bf_skip
        sw r14, 0(r15)
        li r3, 1
        bf_skip:
        addi r12, r12, 12
        addi r13, r13, -1
        bne r13, r0, bf_edge
        addi r2, r2, -1
        bne r3, r0, bf_iter
        bf_next:
        add r10, r10, r5
        j bf_src
        bf_done:
        ret
        """
    )


def random_graph(nodes: int, edges: int, seed: int) -> list[Edge]:
    """A directed cycle through every node plus random extra edges.

    With fewer edges than nodes the graph is a simple chain prefix.
    """
    rng = np.random.default_rng(seed)

    def weights() -> int:
        return int(rng.integers(1, MAX_WEIGHT + 1))

    if edges < nodes:
        return [(i, i + 1, weights()) for i in range(min(edges, nodes - 1))]
    out = [(i, (i + 1) % nodes, weights()) for i in range(nodes)]
    while len(out) < edges:
        u, v = (int(k) for k in rng.integers(0, nodes, 2))
        if u != v:
            out.append((u, v, weights()))
    return out


def floyd_warshall(nodes: int, edges: Sequence[Edge]) -> np.ndarray:
    dist = np.full((nodes, nodes), INF, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    for u, v, w in edges:
        dist[u, v] = min(dist[u, v], w)
    for k in range(nodes):
        dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
    return np.minimum(dist, INF)


def build_bellman_ford(
    nodes: int = 64,
    edges: int = 128,
    seed: int = 6,
    graph: Sequence[Edge] | None = None,
    sim: SimConfig | None = None,
) -> Workload:
    edge_list = list(graph) if graph is not None else random_graph(nodes, edges, seed)
    if nodes < 2 or not edge_list:
        raise WorkloadError("bellman_ford needs at least 2 nodes and 1 edge")
    for u, v, w in edge_list:
        if not (0 <= u < nodes and 0 <= v < nodes and 1 <= w <= MAX_WEIGHT):
            raise WorkloadError(f"bad edge ({u}, {v}, {w})")
    sim = sim or SimConfig()

    triples = np.array([(4 * u, 4 * v, w) for u, v, w in edge_list], dtype="<i4")
    data = DataImage()
    edge_addr = data.place("edges", triples)
    dist_addr = data.alloc("dist", 4 * nodes * nodes)

    p = KernelProgram("bellman_ford", sim)
    emit_bf_task(p)
    n_edges = len(edge_list)

    def emit_main(b: AsmBuilder, dual: bool) -> None:
        p.parallel(
            b,
            Call("bf_sources", (1, 2, nodes, n_edges, edge_addr, dist_addr)),
            Call("bf_sources", (0, 2, nodes, n_edges, edge_addr, dist_addr)),
            dual,
        )

    program, source = p.build(emit_main)
    expected = floyd_warshall(nodes, edge_list).astype("<i4")

    def check(mem) -> list[str]:
        got = read_words(mem, dist_addr, nodes * nodes).reshape(nodes, nodes)
        return compare_exact("dist", got, expected)

    return Workload(
        name="bellman_ford",
        sizes={"nodes": nodes, "edges": n_edges},
        partitioning="interleaved",
        program=program,
        source=source,
        data=data,
        channel_base=sim.channel_base,
        oracle_id="floyd_warshall",
        check=check,
        notes={"seed": seed, "inf": INF, "weights": [1, MAX_WEIGHT]},
    )
