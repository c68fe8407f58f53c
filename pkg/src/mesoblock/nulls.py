"""Expected block edge counts under the supported null models."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateGraphError, MesoError, UnsupportedNullError
from .graph import BlockSummary


class NullKind(str, Enum):
    CONFIGURATION = "config"
    ERDOS_RENYI = "er"
    SCALED = "scaled"
    BLOCK_SCALED = "block-scaled"


@dataclass(frozen=True, eq=False)
class NullModel:
    """A null model choice plus its parameters.

    ``gamma`` is used by the scaled configuration model, ``gamma_matrix`` by
    the block-scaled one. Block-scaled entries may be negative.
    """

    kind: NullKind = NullKind.CONFIGURATION
    gamma: float = 1.0
    gamma_matrix: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "kind", NullKind(self.kind))
        if self.kind is NullKind.SCALED and not self.gamma > 0:
            raise MesoError(f"gamma must be positive, got {self.gamma}")
        if self.kind is NullKind.BLOCK_SCALED:
            if self.gamma_matrix is None:
                raise MesoError("block-scaled null needs a gamma matrix")
            gm = np.array(self.gamma_matrix, dtype=float)
            if gm.ndim != 2 or gm.shape[0] != gm.shape[1]:
                raise MesoError("gamma matrix must be square")
            if not np.all(np.isfinite(gm)):
                raise MesoError("gamma matrix entries must be finite")
            gm.setflags(write=False)
            object.__setattr__(self, "gamma_matrix", gm)

    @classmethod
    def configuration(cls):
        return cls(NullKind.CONFIGURATION)

    @classmethod
    def erdos_renyi(cls):
        return cls(NullKind.ERDOS_RENYI)

    @classmethod
    def scaled(cls, gamma):
        return cls(NullKind.SCALED, gamma=float(gamma))

    @classmethod
    def block_scaled(cls, gamma_matrix):
        return cls(NullKind.BLOCK_SCALED, gamma_matrix=gamma_matrix)

    def supports(self, directed: bool) -> bool:
        return not directed or self.kind in (NullKind.CONFIGURATION, NullKind.BLOCK_SCALED)

    def scale_for(self, a, b) -> float:
        """Multiplier of the configuration expectation for block ``(a, b)``."""
        if self.kind is NullKind.SCALED:
            return self.gamma
        if self.kind is NullKind.BLOCK_SCALED:
            return float(self.gamma_matrix[a, b])
        return 1.0


def check_supported(null: NullModel, bs: BlockSummary):
    if bs.num_edges == 0:
        raise DegenerateGraphError("graph has no edges")
    if not null.supports(bs.directed):
        raise UnsupportedNullError(f"null model {null.kind.value!r} is undirected only")
    if null.kind is NullKind.BLOCK_SCALED and null.gamma_matrix.shape != (bs.k, bs.k):
        raise MesoError(f"gamma matrix is {null.gamma_matrix.shape}, partition has K={bs.k}")


def expected_blocks(null: NullModel, bs: BlockSummary) -> np.ndarray:
    """K x K matrix of expected block counts ``S^P`` under ``null``."""
    check_supported(null, bs)
    norm = float(bs.norm)
    if null.kind is NullKind.ERDOS_RENYI:
        sizes = bs.sizes.astype(float)
        # edge probability 2E/N^2, self-pairs included
        return norm / bs.n**2 * np.outer(sizes, sizes)
    conf = np.outer(bs.t_out, bs.t_in).astype(float) / norm
    if null.kind is NullKind.SCALED:
        return null.gamma * conf
    if null.kind is NullKind.BLOCK_SCALED:
        return null.gamma_matrix * conf
    return conf
