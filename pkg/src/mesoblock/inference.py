"""Degree-corrected SBM likelihood and its link to block modularity.

The likelihood is kept in block form, a function of ``S``, the degree
totals and the rate matrix ``omega`` (rates relative to the configuration
model). Undirected graphs use ``1/2 sum_ab (S log w - T_a T_b w / 2E)``,
directed graphs ``sum_ab (S log w - T_out_a T_in_b w / E)``.
"""

from __future__ import annotations

import logging
import math
import warnings
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import MesoError
from .generators import configuration_sample, derive_seed, rng_for
from .graph import BlockSummary, Graph, Partition, block_summary
from .modularity import block_modularity, q_matrix
from .nulls import NullModel
from .patterns import PatternLabel

log = logging.getLogger(__name__)

STRUCTURE_LABELS = (PatternLabel.COMMUNITY, PatternLabel.BIPARTITE, PatternLabel.CORE_PERIPHERY)


class ImpossibleModelWarning(RuntimeWarning):
    """Edges observed in a block whose rate is zero."""


class DegenerateGroupWarning(RuntimeWarning):
    """A group without edges; its rates are set to zero."""


def _halving(directed: bool) -> float:
    return 1.0 if directed else 0.5


def dcsbm_log_likelihood(bs: BlockSummary, omega) -> float:
    """Block-form log-likelihood; ``-inf`` (with a warning) if an observed block has zero rate."""
    w = np.asarray(omega, dtype=float)
    if w.shape != bs.S.shape:
        raise MesoError(f"omega is {w.shape}, partition has K={bs.k}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise MesoError("omega entries must be finite and non-negative")
    S = bs.S.astype(float)
    if np.any((S > 0) & (w == 0)):
        warnings.warn("observed edges in a zero-rate block", ImpossibleModelWarning, stacklevel=2)
        return -math.inf
    expected = np.outer(bs.t_out, bs.t_in) / float(bs.norm)
    with np.errstate(divide="ignore", invalid="ignore"):
        obs = np.where(S > 0, S * np.log(np.where(w > 0, w, 1.0)), 0.0)
    return float(_halving(bs.directed) * (obs - expected * w).sum())


def estimate_omega(bs: BlockSummary) -> np.ndarray:
    """Maximum-likelihood rates ``norm * S_ab / (T_a T_b)``; zero for empty groups."""
    denom = np.outer(bs.t_out, bs.t_in).astype(float)
    if np.any(denom == 0):
        warnings.warn("group without edges, rates set to 0", DegenerateGroupWarning, stacklevel=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(denom > 0, bs.norm * bs.S / np.where(denom > 0, denom, 1.0), 0.0)
    return w


def profile_log_likelihood(bs: BlockSummary) -> float:
    """Log-likelihood at the estimated rates, without building ``omega``."""
    return _profile(bs.S.astype(float), bs.t_out.astype(float), bs.t_in.astype(float),
                    float(bs.norm), _halving(bs.directed), bs.num_edges)


def _profile(S, t_out, t_in, norm, half, num_edges):
    mask = S > 0
    s = S[mask]
    tt = np.outer(t_out, t_in)[mask]
    return float(half * np.sum(s * np.log(norm * s / tt)) - num_edges)


def modularity_bridge(omega) -> tuple:
    """Weights ``B = log w`` and null scales ``gamma = w / log w``.

    With these, block modularity under the block-scaled configuration null
    equals the log-likelihood divided by the number of edges. Where
    ``w == 1`` the weight is 0 and the scale is infinite; only the product
    ``B * gamma = w`` is meaningful there.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise MesoError("bridge needs strictly positive rates; use the likelihood directly")
    B = np.log(w)
    with np.errstate(divide="ignore"):
        gamma = np.where(B != 0, w / np.where(B != 0, B, 1.0), np.inf)
    return B, gamma


def bridge_modularity(bs: BlockSummary, omega) -> float:
    """Q(B) under the block-scaled null built from ``omega``."""
    B, gamma = modularity_bridge(omega)
    if np.any(np.isinf(gamma)):
        raise MesoError("rate equal to 1 makes the bridge singular")
    return block_modularity(q_matrix(bs, NullModel.block_scaled(gamma)), B)


def planted_partition_gamma(w_in: float, w_out: float) -> float:
    """Resolution that makes scaled-null modularity track the planted-partition likelihood."""
    if w_in <= 0 or w_out <= 0 or w_in == w_out:
        raise MesoError("need distinct positive w_in and w_out")
    return (w_in - w_out) / (math.log(w_in) - math.log(w_out))


@dataclass
class InferenceResult:
    partition: Partition
    omega: np.ndarray
    score: float
    sweeps: int
    restart: int
    history: list = field(default_factory=list, repr=False)


class _State:
    """Mutable block statistics of one optimisation run."""

    def __init__(self, g: Graph, labels, k, omega):
        self.k = k
        self.labels = labels
        self.directed = g.directed
        self.norm = float(g.num_edges if g.directed else 2 * g.num_edges)
        self.half = _halving(g.directed)
        self.num_edges = g.num_edges
        self.k_out = g.out_degree.astype(float)
        self.k_in = g.in_degree.astype(float)
        self.succ = g.neighbors()
        if g.directed:
            rev = Graph(g.n, g.edges[:, ::-1], True)
            self.pred = rev.neighbors()
        else:
            self.pred = self.succ
        bs = block_summary(g, Partition(labels, k))
        self.S = bs.S.astype(float)
        self.t_out = bs.t_out.astype(float)
        self.t_in = bs.t_in.astype(float)
        self.omega = np.array(omega, dtype=float)
        self.score = self.loglik()

    def loglik(self):
        S, w = self.S, self.omega
        if np.any((S > 0) & (w <= 0)):
            return -math.inf
        expected = np.outer(self.t_out, self.t_in) / self.norm
        obs = np.where(S > 0, S * np.log(np.where(w > 0, w, 1.0)), 0.0)
        return float(self.half * (obs - expected * w).sum())

    def counts(self, i):
        out_cnt = np.bincount(self.labels[self.succ[i]], minlength=self.k).astype(float)
        if not self.directed:
            return out_cnt, out_cnt
        return out_cnt, np.bincount(self.labels[self.pred[i]], minlength=self.k).astype(float)

    def moved(self, i, r, s, out_cnt, in_cnt):
        S = self.S.copy()
        S[r, :] -= out_cnt
        S[:, r] -= in_cnt
        S[s, :] += out_cnt
        S[:, s] += in_cnt
        t_out = self.t_out.copy()
        t_in = self.t_in.copy()
        t_out[r] -= self.k_out[i]
        t_out[s] += self.k_out[i]
        t_in[r] -= self.k_in[i]
        t_in[s] += self.k_in[i]
        if not self.directed:
            t_in = t_out
        return S, t_out, t_in

    def estimate(self):
        denom = np.outer(self.t_out, self.t_in)
        return np.where(denom > 0, self.norm * self.S / np.where(denom > 0, denom, 1.0), 0.0)

    def profile(self, S, t_out, t_in):
        return _profile(S, t_out, t_in, self.norm, self.half, self.num_edges)

    def fixed(self, S, t_out, t_in):
        """Log-likelihood of candidate counts at the current rates."""
        w = self.omega
        if np.any((S > 0) & (w <= 0)):
            return -math.inf
        obs = np.where(S > 0, S * np.log(np.where(w > 0, w, 1.0)), 0.0)
        return float(self.half * (obs - np.outer(t_out, t_in) * w / self.norm).sum())


def _run_restart(g: Graph, k: int, max_sweeps: int, seed, restart: int, tol: float,
                 alternating: bool = False):
    rng = rng_for(seed)
    labels = rng.integers(0, k, size=g.n)
    omega = 1.0 + 0.1 * rng.uniform(-1.0, 1.0, size=(k, k))
    if not g.directed:
        omega = np.triu(omega) + np.triu(omega, 1).T
    st = _State(g, labels, k, omega)
    history = [st.score]
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        improved = False
        for i in rng.permutation(g.n).tolist():
            r = int(st.labels[i])
            out_cnt, in_cnt = st.counts(i)
            best, best_s, best_state = st.score, r, None
            for s in range(k):
                if s == r:
                    continue
                cand = st.moved(i, r, s, out_cnt, in_cnt)
                val = st.fixed(*cand) if alternating else st.profile(*cand)
                # strict improvement; ties keep the current label, then the lowest index
                if val > best + tol * max(1.0, abs(best)):
                    best, best_s, best_state = val, s, cand
            if best_state is not None:
                st.S, st.t_out, st.t_in = best_state
                st.labels[i] = best_s
                if not alternating:
                    st.omega = st.estimate()
                st.score = best
                improved = True
        if alternating:
            st.omega = st.estimate()
            st.score = st.profile(st.S, st.t_out, st.t_in)
        history.append(st.score)
        if not improved:
            break
    st.omega = st.estimate()
    st.score = st.profile(st.S, st.t_out, st.t_in)
    history.append(st.score)
    return InferenceResult(Partition(st.labels.copy(), k), st.omega, st.score, sweeps, restart, history)


def greedy_optimize(g: Graph, k: int, restarts: int = 20, max_sweeps: int = 100, seed=0,
                    tol: float = 1e-12, alternating: bool = False) -> InferenceResult:
    """Fit a K-group dc-SBM by greedy single-node relabelling.

    Each restart draws random labels and rates ``1 + 0.1 * U(-1, 1)``, then
    sweeps the nodes in a fresh random order, moving each node to the group
    with the best likelihood after re-estimating the rates, if that is a
    strict improvement. A restart ends after a sweep without moves or after
    ``max_sweeps``. The best restart is returned (earliest on ties).

    With ``alternating=True`` the rates stay fixed during a sweep and are
    re-estimated only between sweeps (experimental; sensitive to the
    starting rates).
    """
    if k < 1:
        raise MesoError("K must be at least 1")
    if g.n == 0 or g.num_edges == 0:
        raise MesoError("graph has no edges")
    if k > g.n:
        raise MesoError(f"K={k} exceeds the number of nodes ({g.n})")
    if restarts < 1 or max_sweeps < 1:
        raise MesoError("restarts and max_sweeps must be positive")
    best = None
    for r in range(restarts):
        res = _run_restart(g, k, max_sweeps, derive_seed(seed, r), r, tol, alternating)
        if best is None or res.score > best.score:
            best = res
    return best


def classify_structures(bs: BlockSummary, omega, f: float = 0.5) -> list:
    """Label group pairs holding at least half of the edges.

    Returns ``((a, b), label)`` tuples; a pair can carry several labels.
    """
    if bs.directed:
        raise MesoError("structure rules are defined for undirected graphs")
    if bs.k < 2:
        raise MesoError("need at least two groups")
    if not 0 < f <= 1:
        raise MesoError(f"f must lie in (0, 1], got {f}")
    w = np.asarray(omega, dtype=float)
    S = bs.S
    out = []
    for a in range(bs.k):
        for b in range(a + 1, bs.k):
            if not S[a, a] + 2 * S[a, b] + S[b, b] > bs.num_edges:
                continue
            lo, hi, wab = min(w[a, a], w[b, b]), max(w[a, a], w[b, b]), w[a, b]
            if wab < f * lo:
                out.append(((a, b), PatternLabel.COMMUNITY))
            if f * wab > hi:
                out.append(((a, b), PatternLabel.BIPARTITE))
            if lo < f * wab and lo < f * hi:
                out.append(((a, b), PatternLabel.CORE_PERIPHERY))
    return out


@dataclass
class Census:
    samples: int
    counts: dict

    @property
    def proportions(self) -> dict:
        return {lab: self.counts.get(lab, 0) / self.samples for lab in STRUCTURE_LABELS}


def _census_member(args):
    g, k, f, seed, idx, restarts, max_sweeps, swaps = args
    sample = configuration_sample(g, derive_seed(seed, 0, idx), swaps)
    res = greedy_optimize(sample, k, restarts, max_sweeps, derive_seed(seed, 1, idx))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateGroupWarning)
        hits = classify_structures(block_summary(sample, res.partition), res.omega, f)
    return sorted({lab for _, lab in hits})


def ensemble_census(g: Graph, k: int = 3, samples: int = 1000, f: float = 0.5, seed=0,
                    restarts: int = 5, max_sweeps: int = 100, swaps_per_edge: int = 20,
                    threads: int = 1) -> Census:
    """Share of degree-preserving samples of ``g`` whose fitted rates show each structure."""
    if samples < 1:
        raise MesoError("census needs at least one sample")
    jobs = [(g, k, f, seed, i, restarts, max_sweeps, swaps_per_edge) for i in range(samples)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            found = list(pool.map(_census_member, jobs, chunksize=max(1, samples // (4 * threads))))
    else:
        found = [_census_member(j) for j in jobs]
    counts = Counter(lab for labs in found for lab in labs)
    return Census(samples, {lab: counts.get(lab, 0) for lab in STRUCTURE_LABELS})


def nmi(x, y) -> float:
    """Normalised mutual information with arithmetic-mean normalisation."""
    x = np.unique(np.asarray(x), return_inverse=True)[1]
    y = np.unique(np.asarray(y), return_inverse=True)[1]
    n = x.size
    joint = np.zeros((x.max() + 1, y.max() + 1))
    np.add.at(joint, (x, y), 1)
    pxy = joint / n
    px, py = pxy.sum(axis=1), pxy.sum(axis=0)
    hx = -np.sum(px[px > 0] * np.log(px[px > 0]))
    hy = -np.sum(py[py > 0] * np.log(py[py > 0]))
    if hx == 0 and hy == 0:
        return 1.0
    nz = pxy > 0
    mi = np.sum(pxy[nz] * np.log(pxy[nz] / np.outer(px, py)[nz]))
    return float(mi / ((hx + hy) / 2))
