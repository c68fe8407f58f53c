"""Enumerating +/-1 block patterns, admissibility under the configuration null,
and naming of the 2x2 patterns."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import MesoError
from .modularity import BlockMatrix

MAX_K = 4


class PatternLabel(str, Enum):
    COMMUNITY = "Community"
    BIPARTITE = "Bipartite"
    CORE_PERIPHERY = "CorePeriphery"
    SOURCE_BASIN = "SourceBasin"
    BASIN_DELTA = "BasinDelta"
    COMMUNITY_HIERARCHY = "CommunityHierarchy"
    UNIFORM = "Uniform"
    OTHER = "Other"


# labels that do not come from the literature taxonomy
INVENTED_LABELS = frozenset({PatternLabel.UNIFORM, PatternLabel.OTHER})


@dataclass(frozen=True)
class PatternClass:
    """Name of a 2x2 pattern.

    ``dense`` is the group with an internal excess (the core, the basin, or
    the delta source), ``flow`` the directed (from, to) pair of the one-way
    flow when there is one. ``signature`` is the row-major sign string.
    """

    label: PatternLabel
    signature: str
    dense: int = None
    flow: tuple = None

    @property
    def invented(self) -> bool:
        return self.label in INVENTED_LABELS


def enumerate_patterns(k: int, directed: bool = False) -> list:
    """All ``2**(k*k)`` (directed) or ``2**(k(k+1)/2)`` (undirected) patterns.

    Order is deterministic: free entries are taken in row-major upper
    triangle (or full matrix) order and counted like a binary number with
    ``+1`` first.
    """
    if not 1 <= k <= MAX_K:
        raise MesoError(f"pattern enumeration supports 1 <= K <= {MAX_K}, got {k}")
    if directed:
        cells = [(i, j) for i in range(k) for j in range(k)]
    else:
        cells = [(i, j) for i in range(k) for j in range(i, k)]
    out = []
    for signs in itertools.product((1, -1), repeat=len(cells)):
        e = np.empty((k, k), dtype=np.int64)
        for (i, j), s in zip(cells, signs):
            e[i, j] = s
            if not directed:
                e[j, i] = s
        out.append(BlockMatrix(e, directed))
    return out


def admissible_under_configuration(B: BlockMatrix) -> bool:
    """True iff no row and no column of ``B`` is all one sign.

    Q rows and columns sum to zero under the configuration null, so a
    sign-uniform row or column can never be matched by an actual excess or
    deficit everywhere.
    """
    e = B.entries
    rows_mixed = np.all(e.max(axis=1) != e.min(axis=1))
    cols_mixed = np.all(e.max(axis=0) != e.min(axis=0))
    return bool(rows_mixed and cols_mixed)


def count_admissible(k: int, directed: bool = False) -> int:
    return sum(admissible_under_configuration(b) for b in enumerate_patterns(k, directed))


def canonical_form(B: BlockMatrix) -> BlockMatrix:
    """Lexicographically smallest pattern over simultaneous row/column permutations."""
    best = None
    for perm in itertools.permutations(range(B.k)):
        p = list(perm)
        cand = B.entries[np.ix_(p, p)]
        key = tuple(cand.ravel().tolist())
        if best is None or key < best[0]:
            best = (key, cand)
    return BlockMatrix(best[1], B.directed)


def classify_2x2(B: BlockMatrix, directed: bool = None) -> PatternClass:
    if B.k != 2:
        raise MesoError(f"classify_2x2 needs a 2x2 pattern, got K={B.k}")
    directed = B.directed if directed is None else directed
    e = B.entries
    sig = B.bits()
    d0, d1 = e[0, 0] > 0, e[1, 1] > 0
    f01, f10 = e[0, 1] > 0, e[1, 0] > 0
    if not directed and f01 != f10:
        raise MesoError("asymmetric pattern classified as undirected")

    if np.all(e == e[0, 0]):
        return PatternClass(PatternLabel.UNIFORM, sig)
    if d0 and d1 and not f01 and not f10:
        return PatternClass(PatternLabel.COMMUNITY, sig)
    if not d0 and not d1 and f01 and f10:
        return PatternClass(PatternLabel.BIPARTITE, sig)
    if d0 != d1:
        dense = 0 if d0 else 1
        loose = 1 - dense
        if f01 and f10:
            return PatternClass(PatternLabel.CORE_PERIPHERY, sig, dense=dense)
        if e[loose, dense] > 0 and e[dense, loose] < 0:
            return PatternClass(PatternLabel.SOURCE_BASIN, sig, dense=dense, flow=(loose, dense))
        if e[dense, loose] > 0 and e[loose, dense] < 0:
            return PatternClass(PatternLabel.BASIN_DELTA, sig, dense=dense, flow=(dense, loose))
    if d0 and d1 and f01 != f10:
        flow = (0, 1) if f01 else (1, 0)
        return PatternClass(PatternLabel.COMMUNITY_HIERARCHY, sig, flow=flow)
    return PatternClass(PatternLabel.OTHER, sig)
