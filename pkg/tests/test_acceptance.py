"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import itertools
import math
import time

import numpy as np
import pytest

from mesoblock.constraints import (
    Outcome,
    pair_context,
    q_sign,
    resolution_example_context,
    resolution_merge_preferred,
    resolution_threshold,
)
from mesoblock.experiments import (
    InferCensusConfig,
    ScanCpConfig,
    ScanNestedConfig,
    run_infer_census,
    run_scan_cp,
    run_scan_nested,
)
from mesoblock.generators import (
    PLANTED_OMEGA,
    SbmSpec,
    configuration_sample,
    derive_seed,
    nested_bipartite_spec,
    planted_fig4_network,
    sbm_generate,
)
from mesoblock.graph import Graph, Partition, block_summary
from mesoblock.inference import (
    bridge_modularity,
    dcsbm_log_likelihood,
    ensemble_census,
    planted_partition_gamma,
)
from mesoblock.modularity import (
    BIPARTITE_2,
    CORE_PERIPHERY_2,
    block_modularity,
    community_pattern,
    newman_modularity,
    q_matrix,
)
from mesoblock.nulls import NullModel
from mesoblock.patterns import PatternLabel, enumerate_patterns

from .conftest import make_corpus, random_graph
from .oracles import dense_adjacency, naive_nodf, pairwise_block_modularity

# mean oracle NODF over the 20 seeded graphs of cell (0.7, 0.5), frozen before any tuning
FROZEN_NODF_REFERENCE = 0.5873823826358151


@pytest.fixture
def report(capsys):
    def emit(num, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    return emit


def _sign(x, tol=1e-9):
    return Outcome(0 if abs(x) <= tol else (1 if x > 0 else -1))


def test_criterion_01_sum_rule(report):
    t0 = time.perf_counter()
    corpus = make_corpus()
    worst = 0.0
    for g, p in corpus:
        q = q_matrix(block_summary(g, p)).values
        worst = max(worst, np.abs(q.sum(axis=0)).max(), np.abs(q.sum(axis=1)).max())
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 5
    report(1, ok, f"{len(corpus)} graphs, max |row/col sum| {worst:.2e}, {dt:.2f}s")
    assert ok


def test_criterion_02_newman(report):
    worst = 0.0
    for g, p in make_corpus():
        bs = block_summary(g, p)
        qb = block_modularity(q_matrix(bs), community_pattern(p.k))
        worst = max(worst, abs(qb - 2 * newman_modularity(bs)))
    ok = worst <= 1e-12
    report(2, ok, f"max |Q(B_comm) - 2 Q_Newman| {worst:.2e}")
    assert ok


def test_criterion_03_two_group_exclusion(report):
    worst, unique_cp = 0.0, 0
    patterns = enumerate_patterns(2)
    for g, p in make_corpus():
        q = q_matrix(block_summary(g, Partition(p.labels % 2, 2)))
        worst = max(worst, abs(block_modularity(q, CORE_PERIPHERY_2) - block_modularity(q, BIPARTITE_2) / 2))
        vals = {B.bits(): block_modularity(q, B) for B in patterns}
        top = max(vals.values())
        winners = [b for b, v in vals.items() if v >= top - 1e-12]
        unique_cp += winners == [CORE_PERIPHERY_2.bits()]
    ok = worst <= 1e-9 and unique_cp == 0
    report(3, ok, f"max |Q_CP - Q_Bip/2| {worst:.2e}, CP unique maximiser {unique_cp} times")
    assert ok


def test_criterion_04_oracles(report):
    corpus = make_corpus()
    rng = np.random.default_rng(4)
    worst, graphs = 0.0, 0
    for g, p in corpus:
        if g.n > 20:
            continue
        graphs += 1
        a = dense_adjacency(g)
        B = rng.choice([-1, 1], size=(p.k, p.k))
        if not g.directed:
            B = np.triu(B) + np.triu(B, 1).T
        gm = rng.uniform(0.2, 2.0, size=(p.k, p.k))
        kinds = ["config", "block-scaled"] + ([] if g.directed else ["er", "scaled"])
        for kind in kinds:
            null = {"config": NullModel.configuration(), "er": NullModel.erdos_renyi(),
                    "scaled": NullModel.scaled(1.5), "block-scaled": NullModel.block_scaled(gm)}[kind]
            got = block_modularity(q_matrix(block_summary(g, p), null), B)
            ref = pairwise_block_modularity(a, p.labels, B, kind, g.directed, 1.5, gm)
            worst = max(worst, abs(got - ref))
    mismatches, checks = 0, 0
    for g, p in corpus:
        bs = block_summary(g, p)
        gm = rng.choice([-1.0, 0.5, 1.0, 2.0], size=(p.k, p.k))
        nulls = [NullModel.configuration(), NullModel.block_scaled(gm)]
        if not g.directed:
            nulls += [NullModel.erdos_renyi(), NullModel.scaled(0.75)]
        for null in nulls:
            q = q_matrix(bs, null).values
            for a_, b_ in itertools.permutations(range(p.k), 2):
                ctx = pair_context(bs, a_, b_)
                checks += 2
                mismatches += q_sign(ctx, "aa", null) != _sign(q[a_, a_])
                mismatches += q_sign(ctx, "ab", null) != _sign(q[a_, b_])
    ok = graphs > 0 and worst <= 1e-9 and mismatches == 0
    report(4, ok, f"{graphs} small graphs, max pairwise gap {worst:.2e}; "
                  f"q_sign mismatches {mismatches}/{checks}")
    assert ok


def test_criterion_05_cp_scan(report):
    t0 = time.perf_counter()
    # the two rest-of-network densities with a documented expected sign
    cfg = ScanCpConfig(p_m=(0.2, 0.8), seed=0)
    res = run_scan_cp(cfg)
    dt = time.perf_counter() - t0
    pm, pp, pc, diff = (res.column(c) for c in ("p_m", "p_p", "p_c", "mean_qcp_minus_qbip"))

    def cell(m, x, y):
        i = np.flatnonzero(np.isclose(pm, m) & np.isclose(pp, x) & np.isclose(pc, y))
        return float(diff[i[0]])

    hi, lo = cell(0.8, 0.4, 0.5), cell(0.2, 0.4, 0.5)
    # outside one grid cell of the analytic curve the sign must agree with it
    band = (pp >= 0.2 - 1e-9) & (pp <= 0.8 + 1e-9)
    curve = pp**2 / pm
    far = band & (np.abs(pc - curve) > cfg.step + 1e-9)
    wrong = int(np.sum(far & (np.sign(diff) != np.sign(pc - curve))))
    ok = hi > 0 > lo and wrong == 0 and dt < 120
    report(5, ok, f"cell(0.4,0.5): {hi:+.4f} at p_m=0.8, {lo:+.4f} at p_m=0.2; "
                  f"{wrong} sign errors beyond one cell of p_p^2/p_m; {dt:.1f}s")
    assert ok


def test_criterion_06_nested_scan(report):
    t0 = time.perf_counter()
    cfg = ScanNestedConfig(seed=0)
    res = run_scan_nested(cfg)
    dt = time.perf_counter() - t0
    row = next(r for r in res.rows if math.isclose(r[0], 0.7) and math.isclose(r[1], 0.5))
    cols = dict(zip(res.columns, row))
    # independent recomputation on the same ensemble: grid indices (14, 10)
    oracle = []
    for r in range(cfg.reps):
        g, _ = sbm_generate(nested_bipartite_spec(0.7, 0.5), derive_seed(cfg.seed, 14, 10, r))
        adj = np.zeros((35, 35), dtype=int)
        adj[g.edges[:, 0], g.edges[:, 1] - 35] = 1
        oracle.append(naive_nodf(adj))
    oracle_mean = float(np.mean(oracle))
    ok = (cols["mean_qbip"] > cols["mean_qcp"]
          and abs(oracle_mean - FROZEN_NODF_REFERENCE) <= 1e-12
          and abs(cols["mean_nodf"] - FROZEN_NODF_REFERENCE) <= 1e-9
          and cols["mean_nodf"] > 0.5 and dt < 120)
    report(6, ok, f"Q_Bip {cols['mean_qbip']:.4f} > Q_CP {cols['mean_qcp']:.4f}; "
                  f"NODF {cols['mean_nodf']:.6f} vs oracle {FROZEN_NODF_REFERENCE:.6f}; {dt:.1f}s")
    assert ok


def test_criterion_07_bridge(report):
    rng = np.random.default_rng(7)
    worst_bridge, done = 0.0, 0
    while done < 100:
        n = int(rng.integers(5, 40))
        directed = bool(rng.integers(2))
        g = random_graph(rng, n, float(rng.uniform(0.1, 0.5)), directed)
        if g.num_edges == 0:
            continue
        k = int(rng.integers(1, 5))
        bs = block_summary(g, Partition(rng.integers(0, k, size=n), k))
        w = rng.uniform(0.2, 5.0, size=(k, k))
        w[np.isclose(w, 1.0)] = 1.5
        if not directed:
            w = np.triu(w) + np.triu(w, 1).T
        gap = abs(bridge_modularity(bs, w) - dcsbm_log_likelihood(bs, w) / g.num_edges)
        worst_bridge = max(worst_bridge, gap)
        done += 1
    worst_pp, done = 0.0, 0
    while done < 100:
        n = int(rng.integers(5, 40))
        g = random_graph(rng, n, float(rng.uniform(0.1, 0.5)), False)
        if g.num_edges == 0:
            continue
        k = int(rng.integers(2, 5))
        w_in, w_out = rng.uniform(0.2, 5.0, size=2)
        w = np.full((k, k), w_out)
        np.fill_diagonal(w, w_in)
        null = NullModel.scaled(planted_partition_gamma(w_in, w_out))
        vals = []
        for _ in range(2):
            bs = block_summary(g, Partition(rng.integers(0, k, size=n), k))
            vals.append((dcsbm_log_likelihood(bs, w), block_modularity(q_matrix(bs, null), np.eye(k))))
        (l1, q1), (l2, q2) = vals
        worst_pp = max(worst_pp, abs((l1 - l2) - g.num_edges * math.log(w_in / w_out) * (q1 - q2)))
        done += 1
    ok = worst_bridge <= 1e-9 and worst_pp <= 1e-9
    report(7, ok, f"max |Q - logP/E| {worst_bridge:.2e}; max planted-partition gap {worst_pp:.2e}")
    assert ok


def test_criterion_08_planted_inference(report):
    t0 = time.perf_counter()
    recovered, cp_below = 0, 0
    q_pairs = []
    for master in range(20):
        res = run_infer_census(InferCensusConfig(restarts=20, seed=master), census=False)
        recovered += res.nmi >= 0.9
        cp_below += res.q_cp < res.q_bipartite
        q_pairs.append((res.q_cp, res.q_bipartite))
    g, _ = planted_fig4_network(derive_seed(0, 0))
    cen = ensemble_census(g, k=3, samples=200, f=0.5, seed=derive_seed(0, 2), restarts=5)
    props = cen.proportions
    dt = time.perf_counter() - t0
    cp, bip = props[PatternLabel.CORE_PERIPHERY], props[PatternLabel.BIPARTITE]
    ok = recovered >= 16 and cp_below >= 16 and cp > bip and dt < 600
    mean_q = np.mean(q_pairs, axis=0)
    report(8, ok, f"NMI>=0.9 in {recovered}/20 seeds, Q_CP<Q_Bip in {cp_below}/20 "
                  f"(mean {mean_q[0]:.2f} vs {mean_q[1]:.2f}; single-instance reference 0.54 vs 0.62); "
                  f"census CP {cp:.3f} > Bip {bip:.3f}; {dt:.0f}s")
    assert ok


def _simple_edges(m, start):
    """``m`` edges on fresh nodes numbered from ``start``; returns (edges, next free id)."""
    size = 2
    while size * (size - 1) // 2 < m:
        size += 1
    pairs = list(itertools.combinations(range(start, start + size), 2))[:m]
    return pairs, start + size


def _resolution_graph(l, num_edges):
    """Groups a and b with ``l`` internal edges, one a-b link, one link each to the rest."""
    ea, nxt = _simple_edges(l, 0)
    a_nodes = nxt
    eb, nxt = _simple_edges(l, nxt)
    rest_edges, end = _simple_edges(num_edges - 2 * l - 3, nxt)
    edges = ea + eb + rest_edges + [(0, a_nodes), (1, nxt), (a_nodes + 1, nxt)]
    labels = [0] * a_nodes + [1] * (nxt - a_nodes) + [2] * (end - nxt)
    return Graph.from_edges(end, edges), Partition(labels, 3)


def test_criterion_09_resolution_limit(report):
    e = 100
    flip_at = math.sqrt(e) - 1
    agree, stated, merged = True, True, []
    for l in range(1, 21):
        g, p = _resolution_graph(l, e)
        bs = block_summary(g, p)
        ctx = pair_context(bs, 0, 1)
        assert (ctx.s_aa, ctx.s_bb, ctx.s_ab, ctx.s_a_rest, ctx.s_b_rest) == (2 * l, 2 * l, 1, 1, 1)
        assert g.num_edges == e
        got = resolution_merge_preferred(ctx)
        assert got == resolution_merge_preferred(resolution_example_context(l, e))
        agree &= got == _sign(q_matrix(bs).values[0, 1])
        if got:
            merged.append(l)
        if l != flip_at:
            stated &= bool(got) == (l < flip_at)
    ok = agree and stated
    report(9, ok, f"agrees with direct Q_ab: {agree}; merge preferred for l in {merged}, "
                  f"flip expected at l={flip_at:g}, direct inequality flips at "
                  f"l={resolution_threshold(e):.3f}")
    assert agree
    assert stated, "merge preference does not flip at l = sqrt(E) - 1"


def test_criterion_10_generators(report):
    spec = SbmSpec((30, 30, 30), PLANTED_OMEGA)
    sizes = np.array(spec.sizes)
    pairs = np.outer(sizes, sizes).astype(float)
    np.fill_diagonal(pairs, sizes * (sizes - 1) / 2)
    mean, sd = pairs * spec.probs, np.sqrt(pairs * spec.probs * (1 - spec.probs))
    inside = 0
    for s in range(200):
        g, part = sbm_generate(spec, derive_seed(10, s))
        S = block_summary(g, part).S.astype(float)
        edges = np.where(np.eye(3, dtype=bool), S / 2, S)
        inside += bool(np.all(np.abs(edges - mean) <= 4 * sd + 1e-12))
    rng = np.random.default_rng(10)
    preserved, tried = 0, 0
    while tried < 100:
        directed = tried % 2 == 1
        g = random_graph(rng, int(rng.integers(6, 40)), float(rng.uniform(0.1, 0.4)), directed)
        if g.num_edges < 2:
            continue
        tried += 1
        h = configuration_sample(g, derive_seed(11, tried))
        preserved += (np.array_equal(h.out_degree, g.out_degree) and np.array_equal(h.in_degree, g.in_degree)
                      and h.num_edges == g.num_edges and h.duplicates == 0)
    ok = inside >= 198 and preserved == 100
    report(10, ok, f"block counts within 4 sd in {inside}/200 runs; degrees preserved in {preserved}/100")
    assert ok
