"""Simple graphs, partitions and their block-level sufficient statistics.

Edge counts follow the adjacency-sum convention: for an undirected graph
``S[a, a]`` is twice the number of edges inside group ``a`` and
``sum(S) == 2 * E``; for a directed graph ``S[a, b]`` counts edges a -> b and
``sum(S) == E``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import MesoError, ParseError, RejectedInputError

log = logging.getLogger(__name__)


def _frozen(arr, dtype=None):
    arr = np.array(arr, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple graph on nodes ``0..n-1``.

    ``edges`` is an ``(E, 2)`` array sorted lexicographically. Undirected
    edges are stored once with ``u < v``.
    """

    n: int
    edges: np.ndarray
    directed: bool = False
    duplicates: int = 0
    out_degree: np.ndarray = field(init=False, repr=False)
    in_degree: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.n:
                raise RejectedInputError("edge endpoint outside 0..n-1")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise RejectedInputError("self-loops are not allowed")
        if not self.directed:
            edges = np.sort(edges, axis=1)
        edges, counts = np.unique(edges, axis=0, return_counts=True)
        dup = self.duplicates + int((counts - 1).sum())
        edges = edges.reshape(-1, 2)
        out_deg = np.bincount(edges[:, 0], minlength=self.n)
        in_deg = np.bincount(edges[:, 1], minlength=self.n)
        if not self.directed:
            out_deg = in_deg = out_deg + in_deg
        object.__setattr__(self, "edges", _frozen(edges))
        object.__setattr__(self, "duplicates", dup)
        object.__setattr__(self, "out_degree", _frozen(out_deg))
        object.__setattr__(self, "in_degree", _frozen(in_deg))

    @classmethod
    def from_edges(cls, n, edges, directed=False):
        return cls(int(n), np.asarray(list(edges), dtype=np.int64).reshape(-1, 2), directed)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def degree(self) -> np.ndarray:
        """Undirected degree ``k``; for directed graphs, in + out."""
        if self.directed:
            return self.out_degree + self.in_degree
        return self.out_degree

    def adjacency(self) -> np.ndarray:
        """Dense 0/1 adjacency matrix. Only meant for small graphs."""
        a = np.zeros((self.n, self.n), dtype=np.int64)
        u, v = self.edges[:, 0], self.edges[:, 1]
        a[u, v] = 1
        if not self.directed:
            a[v, u] = 1
        return a

    def neighbors(self):
        """Per-node neighbour arrays (successors for directed graphs)."""
        u, v = self.edges[:, 0], self.edges[:, 1]
        if not self.directed:
            u, v = np.concatenate([u, v]), np.concatenate([v, u])
        order = np.argsort(u, kind="stable")
        starts = np.searchsorted(u[order], np.arange(self.n + 1))
        tgt = v[order]
        return [tgt[starts[i]:starts[i + 1]] for i in range(self.n)]

    def to_text(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.edges.tolist())


@dataclass(frozen=True, eq=False)
class Partition:
    labels: np.ndarray
    k: int = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if labels.size and labels.min() < 0:
            raise MesoError("group labels must be non-negative")
        k = self.k if self.k is not None else (int(labels.max()) + 1 if labels.size else 1)
        if k < 1:
            raise MesoError("partition needs at least one group")
        if labels.size and labels.max() >= k:
            raise MesoError(f"label {int(labels.max())} out of range for K={k}")
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "k", int(k))

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def groups(self):
        return [np.flatnonzero(self.labels == a) for a in range(self.k)]

    def to_text(self) -> str:
        return "".join(f"{i} {g}\n" for i, g in enumerate(self.labels.tolist()))


@dataclass(frozen=True, eq=False)
class BlockSummary:
    """Block edge counts ``S`` and degree totals per group.

    For undirected summaries ``t_out`` and ``t_in`` are the same array ``T``.
    """

    S: np.ndarray
    t_out: np.ndarray
    t_in: np.ndarray
    num_edges: int
    sizes: np.ndarray
    directed: bool = False

    @property
    def k(self) -> int:
        return int(self.S.shape[0])

    @property
    def T(self) -> np.ndarray:
        return self.t_out

    @property
    def n(self) -> int:
        return int(self.sizes.sum())

    @property
    def norm(self) -> int:
        """Total of ``S``: ``2E`` undirected, ``E`` directed."""
        return self.num_edges if self.directed else 2 * self.num_edges


def block_summary(g: Graph, p: Partition) -> BlockSummary:
    if p.n != g.n:
        raise MesoError(f"partition covers {p.n} nodes, graph has {g.n}")
    k = p.k
    c = p.labels
    S = np.zeros((k, k), dtype=np.int64)
    cu, cv = c[g.edges[:, 0]], c[g.edges[:, 1]]
    np.add.at(S, (cu, cv), 1)
    if not g.directed:
        np.add.at(S, (cv, cu), 1)
    t_out = S.sum(axis=1)
    t_in = S.sum(axis=0)
    if not g.directed:
        t_in = t_out
    return BlockSummary(
        S=_frozen(S),
        t_out=_frozen(t_out),
        t_in=_frozen(t_in),
        num_edges=g.num_edges,
        sizes=_frozen(p.sizes),
        directed=g.directed,
    )


def _parse_pairs(text, what):
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected two integers in {what}, got {raw!r}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer token in {what}: {raw!r}", lineno) from None
        if a < 0 or b < 0:
            raise ParseError(f"negative id in {what}: {raw!r}", lineno)
        pairs.append((lineno, a, b))
    return pairs


def load_edge_list(text: str, directed: bool = False) -> Graph:
    """Parse whitespace-separated ``u v`` lines; ``#`` starts a comment line.

    The node count is ``1 + max id``. Duplicate lines (and reversed
    duplicates when undirected) are collapsed and counted in
    ``Graph.duplicates``.
    """
    pairs = _parse_pairs(text, "edge list")
    for lineno, u, v in pairs:
        if u == v:
            raise RejectedInputError(f"line {lineno}: self-loop {u} {v} rejected")
    n = 1 + max((max(u, v) for _, u, v in pairs), default=-1)
    g = Graph.from_edges(n, [(u, v) for _, u, v in pairs], directed=directed)
    if g.duplicates:
        log.warning("collapsed %d duplicate edge lines", g.duplicates)
    return g


def relabel_edge_text(text: str):
    """Map arbitrary non-negative ids onto ``0..n-1`` in order of first appearance.

    Returns the rewritten edge-list text and the ``{original: dense}`` map.
    """
    id_map = {}
    out = []
    for _, u, v in _parse_pairs(text, "edge list"):
        for x in (u, v):
            id_map.setdefault(x, len(id_map))
        out.append(f"{id_map[u]} {id_map[v]}\n")
    return "".join(out), id_map


def load_partition(text: str, n: int = None, k: int = None) -> Partition:
    """Parse ``node group`` lines. Every node ``0..n-1`` must appear exactly once."""
    pairs = _parse_pairs(text, "partition")
    if n is None:
        n = 1 + max((i for _, i, _ in pairs), default=-1)
    labels = np.full(n, -1, dtype=np.int64)
    for lineno, i, grp in pairs:
        if i >= n:
            raise ParseError(f"node {i} outside graph of {n} nodes", lineno)
        if labels[i] >= 0:
            raise ParseError(f"node {i} assigned twice", lineno)
        labels[i] = grp
    missing = np.flatnonzero(labels < 0)
    if missing.size:
        raise MesoError(f"nodes without a group: {missing[:10].tolist()}")
    return Partition(labels, k)
