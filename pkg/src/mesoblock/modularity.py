"""Block modularity: the Q matrix, Q(B), Newman modularity and row/column sum rules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MesoError, ParseError
from .graph import BlockSummary
from .nulls import NullKind, NullModel, expected_blocks


@dataclass(frozen=True, eq=False)
class BlockMatrix:
    """K x K pattern of +1 (excess) / -1 (deficit) entries."""

    entries: np.ndarray
    directed: bool = False

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.int64)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise MesoError(f"block matrix must be square, got shape {e.shape}")
        if not np.all(np.abs(e) == 1):
            raise MesoError("block matrix entries must be +1 or -1")
        if not self.directed and not np.array_equal(e, e.T):
            raise MesoError("undirected block matrix must be symmetric")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def k(self) -> int:
        return int(self.entries.shape[0])

    def __neg__(self):
        return BlockMatrix(-self.entries, self.directed)

    def __eq__(self, other):
        return isinstance(other, BlockMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def bits(self) -> str:
        """Row-major ``+``/``-`` string, e.g. ``+--+`` for the 2x2 community pattern."""
        return "".join("+" if x > 0 else "-" for x in self.entries.ravel())

    def to_text(self) -> str:
        return "".join(" ".join(f"{x:+d}" for x in row) + "\n" for row in self.entries.tolist())


_TOKENS = {"+1": 1, "1": 1, "+": 1, "-1": -1, "-": -1}


def parse_block_matrix(text: str, directed: bool = False) -> BlockMatrix:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([_TOKENS[tok] for tok in line.split()])
        except KeyError as exc:
            raise ParseError(f"bad block matrix entry {exc.args[0]!r}", lineno) from None
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ParseError("block matrix must have K rows of K entries")
    return BlockMatrix(rows, directed)


COMMUNITY_2 = BlockMatrix([[1, -1], [-1, 1]])
BIPARTITE_2 = BlockMatrix([[-1, 1], [1, -1]])
CORE_PERIPHERY_2 = BlockMatrix([[1, 1], [1, -1]])


def community_pattern(k: int, directed: bool = False) -> BlockMatrix:
    return BlockMatrix(2 * np.eye(k, dtype=np.int64) - 1, directed)


@dataclass(frozen=True, eq=False)
class QMatrix:
    values: np.ndarray
    num_edges: int
    directed: bool = False

    @property
    def k(self) -> int:
        return int(self.values.shape[0])

    @property
    def norm(self) -> float:
        return float(self.num_edges if self.directed else 2 * self.num_edges)


def q_matrix(bs: BlockSummary, null: NullModel = None) -> QMatrix:
    """Observed minus expected block counts, ``Q_ab = S_ab - S^P_ab``."""
    null = null or NullModel.configuration()
    q = bs.S - expected_blocks(null, bs)
    q.setflags(write=False)
    return QMatrix(q, bs.num_edges, bs.directed)


def block_modularity(q: QMatrix, B) -> float:
    """``sum_ab Q_ab B_ab`` over ``2E`` (undirected) or ``E`` (directed).

    ``B`` is normally a :class:`BlockMatrix`; a plain real array is accepted
    as a weight matrix, which the likelihood bridge needs.
    """
    if isinstance(B, BlockMatrix):
        w = B.entries
        # symmetric patterns apply to either kind of graph
        if not q.directed and not np.array_equal(w, w.T):
            raise MesoError("asymmetric block matrix on an undirected graph")
    else:
        w = np.asarray(B, dtype=float)
    if w.shape != q.values.shape:
        raise MesoError(f"block matrix is {w.shape[0]}x{w.shape[1]}, Q matrix is {q.k}x{q.k}")
    return float((q.values * w).sum() / q.norm)


def newman_modularity(bs: BlockSummary) -> float:
    """Configuration-null modularity of the partition as communities.

    Directed summaries use the Leicht-Newman form ``(1/E) sum_a Q_aa``.
    """
    q = q_matrix(bs, NullModel.configuration())
    return float(np.trace(q.values) / q.norm)


@dataclass(frozen=True)
class SumRules:
    """Row, column and global sums of Q with the values the null predicts."""

    rows: np.ndarray
    cols: np.ndarray
    total: float
    expected_rows: np.ndarray
    expected_cols: np.ndarray
    expected_total: float

    def max_residual(self) -> float:
        return float(max(
            np.abs(self.rows - self.expected_rows).max(),
            np.abs(self.cols - self.expected_cols).max(),
            abs(self.total - self.expected_total),
        ))


def sum_rules(q: QMatrix, null: NullModel, bs: BlockSummary) -> SumRules:
    rows = q.values.sum(axis=1)
    cols = q.values.sum(axis=0)
    total = float(q.values.sum())
    norm = float(bs.norm)
    kind = null.kind
    if kind is NullKind.CONFIGURATION:
        exp_rows = np.zeros(bs.k)
        exp_cols = np.zeros(bs.k)
    elif kind is NullKind.ERDOS_RENYI:
        exp_rows = exp_cols = bs.T - norm * bs.sizes / bs.n
    elif kind is NullKind.SCALED:
        exp_rows = exp_cols = bs.T * (1.0 - null.gamma)
    else:
        exp_rows = bs.t_out - null.gamma_matrix @ bs.t_in * bs.t_out / norm
        exp_cols = bs.t_in - bs.t_out @ null.gamma_matrix * bs.t_in / norm
    return SumRules(
        rows=rows,
        cols=cols,
        total=total,
        expected_rows=np.asarray(exp_rows, dtype=float),
        expected_cols=np.asarray(exp_cols, dtype=float),
        expected_total=float(np.sum(exp_rows)),
    )


def cp_exclusion_gap(q: QMatrix) -> float:
    """``Q(B_CP) - Q(B_bipartite) / 2`` for a two-group configuration-null Q matrix.

    Zero whenever the row/column sums vanish, so a two-group core-periphery
    never beats both the community and the bipartite pattern.
    """
    if q.k != 2:
        raise MesoError("the core-periphery exclusion identity is a K=2 statement")
    return block_modularity(q, CORE_PERIPHERY_2.entries) - block_modularity(q, BIPARTITE_2.entries) / 2
