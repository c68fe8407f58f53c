"""Random graphs: stochastic block models and degree-preserving rewiring.

All randomness comes from numpy's PCG64 bit generator. A run is identified
by an integer seed; ensemble members use ``derive_seed(master, index)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MesoError
from .graph import Graph, Partition

RNG_ALGORITHM = "numpy.PCG64/SeedSequence"

PLANTED_OMEGA = ((0.6, 0.5, 0.0), (0.5, 0.0, 0.0), (0.0, 0.0, 0.2))


def rng_for(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def derive_seed(master: int, *index: int) -> int:
    """64-bit seed for ensemble member ``index`` of a run seeded with ``master``."""
    ss = np.random.SeedSequence([int(master), *map(int, index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True, eq=False)
class SbmSpec:
    sizes: tuple
    probs: np.ndarray
    directed: bool = False

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        probs = np.array(self.probs, dtype=float)
        k = len(sizes)
        if k == 0 or any(s <= 0 for s in sizes):
            raise MesoError(f"all groups need at least one node, got sizes {sizes}")
        if probs.shape != (k, k):
            raise MesoError(f"probability matrix must be {k}x{k}, got {probs.shape}")
        if np.any(probs < 0) or np.any(probs > 1) or not np.all(np.isfinite(probs)):
            raise MesoError("edge probabilities must lie in [0, 1]")
        if not self.directed and not np.array_equal(probs, probs.T):
            raise MesoError("undirected SBM needs a symmetric probability matrix")
        probs.setflags(write=False)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "probs", probs)

    @property
    def labels(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.sizes)), self.sizes)


def sbm_generate(spec: SbmSpec, seed) -> tuple:
    """Sample an SBM graph; returns ``(graph, planted_partition)``.

    Nodes are numbered group by group. Every unordered pair (ordered when
    directed) of distinct nodes is an edge independently with its block
    probability.
    """
    rng = rng_for(seed)
    labels = spec.labels
    n = labels.size
    p = spec.probs[labels][:, labels]
    hit = rng.random((n, n)) < p
    np.fill_diagonal(hit, False)
    if not spec.directed:
        hit = np.triu(hit, 1)
    u, v = np.nonzero(hit)
    g = Graph(n, np.column_stack([u, v]), spec.directed)
    return g, Partition(labels, len(spec.sizes))


def cp_spec(p_c, p_p, p_m, n=30) -> SbmSpec:
    """Core, periphery and an unrelated community, ``n`` nodes each."""
    probs = [[p_c, p_p, 0.0], [p_p, 0.0, 0.0], [0.0, 0.0, p_m]]
    return SbmSpec((n, n, n), probs)


def nested_bipartite_spec(p_cp, p_cc, n_core=10, n_periphery=25) -> SbmSpec:
    """Bipartite graph with a core and periphery on each side.

    Group order is (core a, periphery a, core b, periphery b).
    """
    probs = [
        [0.0, 0.0, p_cc, p_cp],
        [0.0, 0.0, p_cp, 0.0],
        [p_cc, p_cp, 0.0, 0.0],
        [p_cp, 0.0, 0.0, 0.0],
    ]
    return SbmSpec((n_core, n_periphery, n_core, n_periphery), probs)


def planted_fig4_network(seed, sizes=(30, 30, 30)) -> tuple:
    """Core, periphery and a sparse separate community with the standard rates."""
    return sbm_generate(SbmSpec(sizes, PLANTED_OMEGA), seed)


def configuration_sample(g: Graph, seed, swaps_per_edge: int = 20) -> Graph:
    """Degree-preserving randomisation by double-edge swaps.

    ``swaps_per_edge * E`` swaps are attempted; a swap creating a self-loop
    or a duplicate edge is rejected and the graph left unchanged for that
    attempt. Directed swaps exchange targets, preserving in- and out-degrees.
    """
    m = g.num_edges
    if m < 2:
        raise MesoError("need at least two edges to rewire")
    if swaps_per_edge < 1:
        raise MesoError("swaps_per_edge must be at least 1")
    rng = rng_for(seed)
    attempts = int(swaps_per_edge) * m
    first = rng.integers(0, m, size=attempts)
    second = rng.integers(0, m - 1, size=attempts)
    second += second >= first  # distinct edge index
    flips = rng.random(attempts) < 0.5

    edges = [tuple(e) for e in g.edges.tolist()]
    directed = g.directed
    if directed:
        present = set(edges)
    else:
        present = {(u, v) if u < v else (v, u) for u, v in edges}

    for i, j, flip in zip(first.tolist(), second.tolist(), flips.tolist()):
        u, v = edges[i]
        x, y = edges[j]
        if flip and not directed:
            x, y = y, x
        if u == y or x == v:
            continue
        e1, e2 = (u, y), (x, v)
        if not directed:
            e1 = e1 if u < y else (y, u)
            e2 = e2 if x < v else (v, x)
        if e1 in present or e2 in present:
            continue
        if directed:
            present.discard((u, v))
            present.discard((x, y))
        else:
            present.discard((u, v) if u < v else (v, u))
            present.discard((x, y) if x < y else (y, x))
        present.add(e1)
        present.add(e2)
        edges[i] = e1
        edges[j] = e2
    return Graph(g.n, np.array(edges, dtype=np.int64), directed)
