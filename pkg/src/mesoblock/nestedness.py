"""NODF nestedness of bipartite incidence matrices, on a 0..1 scale."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MesoError, NotBipartiteError
from .graph import Graph


@dataclass(frozen=True, eq=False)
class BiAdjacency:
    matrix: np.ndarray
    row_nodes: np.ndarray = None
    col_nodes: np.ndarray = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.int64)
        if m.ndim != 2:
            raise MesoError("bi-adjacency must be a 2-d matrix")
        if not np.all((m == 0) | (m == 1)):
            raise MesoError("bi-adjacency entries must be 0 or 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def row_totals(self):
        return self.matrix.sum(axis=1)

    @property
    def col_totals(self):
        return self.matrix.sum(axis=0)

    @property
    def T(self):
        return BiAdjacency(self.matrix.T, self.col_nodes, self.row_nodes)


def from_bipartite(g: Graph, left) -> BiAdjacency:
    """Rows are ``left`` nodes in ascending id order, columns the remaining nodes."""
    left = np.asarray(sorted(set(int(i) for i in left)), dtype=np.int64)
    is_left = np.zeros(g.n, dtype=bool)
    is_left[left] = True
    right = np.flatnonzero(~is_left)
    u, v = g.edges[:, 0], g.edges[:, 1]
    same_side = is_left[u] == is_left[v]
    if np.any(same_side):
        bad = g.edges[np.argmax(same_side)].tolist()
        raise NotBipartiteError(f"edge {bad[0]}-{bad[1]} joins two nodes on the same side")
    row_of = np.full(g.n, -1)
    row_of[left] = np.arange(left.size)
    col_of = np.full(g.n, -1)
    col_of[right] = np.arange(right.size)
    m = np.zeros((left.size, right.size), dtype=np.int64)
    lu = np.where(is_left[u], u, v)
    rv = np.where(is_left[u], v, u)
    m[row_of[lu], col_of[rv]] = 1
    return BiAdjacency(m, left, right)


def _paired_fill(m: np.ndarray):
    """Sum of paired nestedness over row pairs and the number of pairs."""
    r = m.shape[0]
    if r < 2:
        return 0.0, 0
    totals = m.sum(axis=1)
    overlap = m @ m.T
    # pair (i, j) scores only when row i is strictly fuller than non-empty row j
    decreasing = (totals[:, None] > totals[None, :]) & (totals[None, :] > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(decreasing, overlap / np.maximum(totals[None, :], 1), 0.0)
    return float(frac.sum()), r * (r - 1) // 2


def nodf(m) -> float:
    """Nestedness by overlap and decreasing fill.

    Each unordered pair of rows (and of columns) contributes the share of
    the sparser line's ones that the fuller line also has, provided the
    fuller line is strictly fuller; otherwise it contributes zero. The
    result is the mean over all row and column pairs.
    """
    if isinstance(m, BiAdjacency):
        m = m.matrix
    m = np.asarray(m, dtype=np.int64)
    r, c = m.shape
    if r < 2 and c < 2:
        raise MesoError("NODF needs at least two rows or two columns")
    if not m.any():
        raise MesoError("NODF is undefined for an all-zero matrix")
    row_sum, row_pairs = _paired_fill(m)
    col_sum, col_pairs = _paired_fill(m.T)
    return (row_sum + col_sum) / (row_pairs + col_pairs)
