import itertools

import numpy as np
import pytest

from mesoblock.errors import MesoError
from mesoblock.generators import (
    PLANTED_OMEGA,
    SbmSpec,
    configuration_sample,
    derive_seed,
    nested_bipartite_spec,
    planted_fig4_network,
    sbm_generate,
)
from mesoblock.graph import Graph, block_summary

from .conftest import random_graph


def test_deterministic_cliques():
    g, p = sbm_generate(SbmSpec((2, 2), [[1, 0], [0, 1]]), seed=5)
    assert g.edges.tolist() == [[0, 1], [2, 3]]
    assert p.labels.tolist() == [0, 0, 1, 1]


def test_spec_validation():
    with pytest.raises(MesoError):
        SbmSpec((0, 2), [[1, 0], [0, 1]])
    with pytest.raises(MesoError):
        SbmSpec((2, 2), [[1, 0.2], [0, 1]])
    with pytest.raises(MesoError):
        SbmSpec((2, 2), [[1.5, 0], [0, 1]])
    assert SbmSpec((2, 2), [[1, 0.2], [0, 1]], directed=True).directed


def test_sbm_is_seed_deterministic():
    spec = SbmSpec((5, 7), [[0.5, 0.2], [0.2, 0.4]])
    a, _ = sbm_generate(spec, 11)
    b, _ = sbm_generate(spec, 11)
    c, _ = sbm_generate(spec, 12)
    assert a.to_text() == b.to_text()
    assert a.to_text() != c.to_text()


def test_directed_sbm_uses_ordered_pairs():
    g, _ = sbm_generate(SbmSpec((3, 3), [[0, 1], [0, 0]], directed=True), 0)
    assert g.num_edges == 9
    assert all(u < 3 <= v for u, v in g.edges.tolist())


def _expected_blocks(spec):
    sizes = np.array(spec.sizes)
    pairs = np.outer(sizes, sizes).astype(float)
    np.fill_diagonal(pairs, sizes * (sizes - 1) / 2)
    return pairs


def test_block_counts_within_four_sigma():
    spec = SbmSpec((30, 30, 30), PLANTED_OMEGA)
    pairs = _expected_blocks(spec)
    p = spec.probs
    mean, sd = pairs * p, np.sqrt(pairs * p * (1 - p))
    ok = 0
    for s in range(100):
        g, part = sbm_generate(spec, derive_seed(99, s))
        S = block_summary(g, part).S.astype(float)
        edges = np.where(np.eye(3, dtype=bool), S / 2, S)
        ok += np.all(np.abs(edges - mean) <= 4 * sd + 1e-12)
    assert ok >= 99


def test_planted_zero_blocks_and_core_density():
    for s in range(5):
        g, p = planted_fig4_network(s)
        S = block_summary(g, p).S
        assert S[1, 1] == 0 and S[0, 2] == 0 and S[1, 2] == 0
        mean = 0.6 * 435
        sd = np.sqrt(435 * 0.6 * 0.4)
        assert abs(S[0, 0] / 2 - mean) <= 4 * sd
    assert planted_fig4_network(1)[0].to_text() != planted_fig4_network(2)[0].to_text()


def test_nested_spec_is_bipartite():
    g, p = sbm_generate(nested_bipartite_spec(0.5, 0.9), 3)
    S = block_summary(g, p).S
    assert S[0, 0] == S[1, 1] == S[0, 1] == S[2, 3] == S[1, 3] == 0
    assert p.sizes.tolist() == [10, 25, 10, 25]


def test_configuration_sample_preserves_degrees():
    rng = np.random.default_rng(2)
    for directed in (False, True):
        for _ in range(10):
            g = random_graph(rng, 25, 0.2, directed)
            h = configuration_sample(g, int(rng.integers(1 << 30)))
            assert np.array_equal(h.out_degree, g.out_degree)
            assert np.array_equal(h.in_degree, g.in_degree)
            assert h.duplicates == 0
            assert np.all(h.edges[:, 0] != h.edges[:, 1])
            assert h.num_edges == g.num_edges


def test_two_edges_reach_every_matching():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    seen = {configuration_sample(g, s, 5).to_text() for s in range(60)}
    matchings = {Graph.from_edges(4, m).to_text() for m in ([(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)])}
    assert seen == matchings


def test_directed_triangle_samples():
    g = Graph.from_edges(3, [(0, 1), (1, 2), (2, 0)], directed=True)
    feasible = set()
    for perm in itertools.permutations(range(3)):
        edges = [(perm[i], perm[(i + 1) % 3]) for i in range(3)]
        feasible.add(Graph.from_edges(3, edges, directed=True).to_text())
    for s in range(20):
        assert configuration_sample(g, s).to_text() in feasible


def test_configuration_sample_errors_and_determinism():
    with pytest.raises(MesoError):
        configuration_sample(Graph.from_edges(2, [(0, 1)]), 0)
    g = random_graph(np.random.default_rng(0), 20, 0.3, False)
    with pytest.raises(MesoError):
        configuration_sample(g, 0, swaps_per_edge=0)
    assert configuration_sample(g, 4).to_text() == configuration_sample(g, 4).to_text()


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(0, 1) == derive_seed(0, 1)
    assert len({derive_seed(0, i) for i in range(1000)}) == 1000
    assert derive_seed(0, 1, 2) != derive_seed(0, 2, 1)
