"""Parameter scans and the inference/census experiment.

Every cell and ensemble member draws its own seed from the master seed, so
results do not depend on the number of worker processes.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import MesoError
from .generators import (
    RNG_ALGORITHM,
    cp_spec,
    derive_seed,
    nested_bipartite_spec,
    planted_fig4_network,
    sbm_generate,
)
from .graph import Graph, Partition, block_summary
from .heatmap import grid_to_csv_text
from .inference import ensemble_census, greedy_optimize, nmi
from .modularity import BlockMatrix, block_modularity, q_matrix
from .nestedness import nodf

CP_3 = BlockMatrix([[1, 1, -1], [1, -1, -1], [-1, -1, 1]])
BIPARTITE_3 = BlockMatrix([[-1, 1, -1], [1, -1, -1], [-1, -1, 1]])

NESTED_CP_4 = BlockMatrix([
    [-1, -1, 1, 1],
    [-1, -1, 1, -1],
    [1, 1, -1, -1],
    [1, -1, -1, -1],
])
NESTED_BIPARTITE_4 = BlockMatrix([
    [-1, -1, -1, 1],
    [-1, -1, 1, -1],
    [-1, 1, -1, -1],
    [1, -1, -1, -1],
])


def grid_axis(lo, hi, step):
    if step <= 0:
        raise MesoError("grid step must be positive")
    if hi < lo:
        raise MesoError("grid upper bound below lower bound")
    count = int(round((hi - lo) / step)) + 1
    return np.round(lo + step * np.arange(count), 10)


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return "nan" if not np.isfinite(x) else f"{float(x):.12g}"
    return str(x)


def _pool_map(fn, jobs, threads):
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    return [fn(j) for j in jobs]


def _provenance(name, cfg):
    params = " ".join(f"{k}={_fmt(v) if not isinstance(v, (list, tuple)) else ','.join(map(_fmt, v))}"
                      for k, v in asdict(cfg).items() if k != "threads")
    return [f"mesoblock {__version__} {name}", params, f"rng={RNG_ALGORITHM}"]


# -- core-periphery scan ---------------------------------------------------

@dataclass
class ScanCpConfig:
    p_m: tuple = (0.2, 0.5, 0.8)
    p_p_min: float = 0.05
    p_p_max: float = 1.0
    p_c_min: float = 0.05
    p_c_max: float = 1.0
    step: float = 0.05
    n: int = 30
    reps: int = 20
    seed: int = 0
    threads: int = 1

    def validate(self):
        if self.reps < 1:
            raise MesoError("reps must be at least 1")
        if self.n < 2:
            raise MesoError("need at least two nodes per group")
        for v in (*self.p_m, self.p_p_min, self.p_p_max, self.p_c_min, self.p_c_max):
            if not 0 <= v <= 1:
                raise MesoError(f"probability {v} outside [0, 1]")


def cp_difference(g: Graph, p: Partition) -> float:
    """``Q_CP - Q_Bipartite`` for a core/periphery/community partition."""
    q = q_matrix(block_summary(g, p))
    return block_modularity(q, CP_3) - block_modularity(q, BIPARTITE_3)


def _scan_cp_cell(args):
    p_m, p_p, p_c, n, seeds = args
    spec = cp_spec(p_c, p_p, p_m, n)
    vals = []
    for s in seeds:
        g, p = sbm_generate(spec, s)
        if g.num_edges:
            vals.append(cp_difference(g, p))
    return vals


@dataclass
class ScanResult:
    columns: list
    rows: list
    header: list = field(default_factory=list)

    def to_csv(self) -> str:
        return grid_to_csv_text(self.header, self.columns, [[_fmt(v) for v in r] for r in self.rows])

    def column(self, name):
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)


def run_scan_cp(cfg: ScanCpConfig) -> ScanResult:
    """Mean ``Q_CP - Q_Bipartite`` over SBM core/periphery/community graphs."""
    cfg.validate()
    pps = grid_axis(cfg.p_p_min, cfg.p_p_max, cfg.step)
    pcs = grid_axis(cfg.p_c_min, cfg.p_c_max, cfg.step)
    cells = []
    for (im, p_m), (ip, p_p), (ic, p_c) in itertools.product(
            enumerate(cfg.p_m), enumerate(pps), enumerate(pcs)):
        seeds = [derive_seed(cfg.seed, im, ip, ic, r) for r in range(cfg.reps)]
        cells.append((float(p_m), float(p_p), float(p_c), cfg.n, seeds))
    results = _pool_map(_scan_cp_cell, cells, cfg.threads)
    rows = []
    for (p_m, p_p, p_c, _, _), vals in zip(cells, results):
        mean = float(np.mean(vals)) if vals else float("nan")
        std = float(np.std(vals)) if vals else float("nan")
        boundary = p_p**2 / p_m if p_m > 0 else float("inf")
        rows.append([p_m, p_p, p_c, mean, std, len(vals), boundary])
    columns = ["p_m", "p_p", "p_c", "mean_qcp_minus_qbip", "std_qcp_minus_qbip", "reps", "boundary_p_c"]
    return ScanResult(columns, rows, _provenance("scan-cp", cfg) + ["null=config"])


def cp_boundary_points(p_m, pps):
    return [(float(x), float(x**2 / p_m)) for x in pps]


# -- nested bipartite scan -------------------------------------------------

@dataclass
class ScanNestedConfig:
    p_cp_min: float = 0.0
    p_cp_max: float = 1.0
    p_cc_min: float = 0.0
    p_cc_max: float = 1.0
    step: float = 0.05
    n_core: int = 10
    n_periphery: int = 25
    reps: int = 20
    seed: int = 0
    threads: int = 1

    def validate(self):
        if self.reps < 1:
            raise MesoError("reps must be at least 1")
        if self.n_core < 1 or self.n_periphery < 1:
            raise MesoError("group sizes must be positive")
        for v in (self.p_cp_min, self.p_cp_max, self.p_cc_min, self.p_cc_max):
            if not 0 <= v <= 1:
                raise MesoError(f"probability {v} outside [0, 1]")


def nested_measures(g: Graph, p: Partition, n_left: int):
    """``(Q_CP, Q_Bipartite, NODF)`` for a 4-group nested bipartite graph."""
    q = q_matrix(block_summary(g, p))
    adj = np.zeros((n_left, g.n - n_left), dtype=np.int64)
    u, v = g.edges[:, 0], g.edges[:, 1]
    adj[u, v - n_left] = 1
    return block_modularity(q, NESTED_CP_4), block_modularity(q, NESTED_BIPARTITE_4), nodf(adj)


def _scan_nested_cell(args):
    p_cp, p_cc, n_core, n_per, seeds = args
    spec = nested_bipartite_spec(p_cp, p_cc, n_core, n_per)
    out = []
    for s in seeds:
        g, p = sbm_generate(spec, s)
        if g.num_edges:
            out.append(nested_measures(g, p, n_core + n_per))
    return out


def run_scan_nested(cfg: ScanNestedConfig) -> ScanResult:
    """Mean ``Q_CP``, ``Q_Bipartite`` and NODF over nested bipartite SBM graphs."""
    cfg.validate()
    pcps = grid_axis(cfg.p_cp_min, cfg.p_cp_max, cfg.step)
    pccs = grid_axis(cfg.p_cc_min, cfg.p_cc_max, cfg.step)
    cells = []
    for (i, p_cp), (j, p_cc) in itertools.product(enumerate(pcps), enumerate(pccs)):
        seeds = [derive_seed(cfg.seed, i, j, r) for r in range(cfg.reps)]
        cells.append((float(p_cp), float(p_cc), cfg.n_core, cfg.n_periphery, seeds))
    results = _pool_map(_scan_nested_cell, cells, cfg.threads)
    rows = []
    nan = float("nan")
    for (p_cp, p_cc, *_), vals in zip(cells, results):
        if vals:
            arr = np.array(vals)
            qcp, qbip, nd = arr.mean(axis=0)
        else:
            qcp = qbip = nd = nan
        rows.append([p_cp, p_cc, qcp, qbip, qcp - qbip, nd, len(vals)])
    columns = ["p_cp", "p_cc", "mean_qcp", "mean_qbip", "mean_qcp_minus_qbip", "mean_nodf", "reps"]
    return ScanResult(columns, rows, _provenance("scan-nested", cfg) + ["null=config nodf_scale=0..1"])


# -- inference and census --------------------------------------------------

@dataclass
class InferCensusConfig:
    k: int = 3
    restarts: int = 20
    max_sweeps: int = 100
    samples: int = 1000
    f: float = 0.5
    census_restarts: int = 5
    swaps_per_edge: int = 20
    seed: int = 0
    threads: int = 1


def cp_roles(bs) -> list:
    """Order groups as (core, periphery, other) for a three-group fit.

    The core-periphery pair is the pair with the most edges between them;
    its core is the member with the larger internal rate.
    """
    if bs.k != 3:
        raise MesoError("role assignment needs exactly three groups")
    S = bs.S.astype(float)
    T = bs.T.astype(float)
    pairs = [(0, 1), (0, 2), (1, 2)]
    a, b = max(pairs, key=lambda ab: (S[ab[0], ab[1]], -ab[0], -ab[1]))
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.where(T > 0, S.diagonal() / np.where(T > 0, T, 1.0) ** 2, 0.0)
    core, per = (a, b) if dens[a] >= dens[b] else (b, a)
    other = 3 - a - b
    return [core, per, other]


def relabel(p: Partition, order) -> Partition:
    """Partition where old group ``order[i]`` becomes group ``i``."""
    inv = np.empty(len(order), dtype=np.int64)
    inv[np.asarray(order)] = np.arange(len(order))
    return Partition(inv[p.labels], p.k)


@dataclass
class InferCensusResult:
    inference: object
    partition: Partition
    q_cp: float
    q_bipartite: float
    nmi: float = None
    census: object = None

    def census_csv(self, header) -> str:
        rows = [[lab.value, self.census.counts[lab], _fmt(prop)]
                for lab, prop in self.census.proportions.items()]
        return grid_to_csv_text(header, ["structure", "count", "proportion"], rows)


def run_infer_census(cfg: InferCensusConfig, graph: Graph = None, planted: Partition = None,
                     census: bool = True) -> InferCensusResult:
    """Fit the planted (or given) network, score CP vs bipartite, then census its null ensemble."""
    if graph is None:
        graph, planted = planted_fig4_network(derive_seed(cfg.seed, 0))
    res = greedy_optimize(graph, cfg.k, cfg.restarts, cfg.max_sweeps, derive_seed(cfg.seed, 1))
    part = res.partition
    q_cp = q_bip = float("nan")
    if cfg.k == 3:
        part = relabel(part, cp_roles(block_summary(graph, part)))
        q = q_matrix(block_summary(graph, part))
        q_cp, q_bip = block_modularity(q, CP_3), block_modularity(q, BIPARTITE_3)
    score = nmi(planted.labels, part.labels) if planted is not None else None
    cen = None
    if census:
        cen = ensemble_census(graph, cfg.k, cfg.samples, cfg.f, derive_seed(cfg.seed, 2),
                              cfg.census_restarts, cfg.max_sweeps, cfg.swaps_per_edge, cfg.threads)
    return InferCensusResult(res, part, q_cp, q_bip, score, cen)
