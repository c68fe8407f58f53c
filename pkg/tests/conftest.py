import numpy as np
import pytest

from mesoblock.graph import Graph, Partition


def random_graph(rng, n, p, directed):
    a = rng.random((n, n)) < p
    np.fill_diagonal(a, False)
    if not directed:
        a = np.triu(a, 1)
    u, v = np.nonzero(a)
    return Graph(n, np.column_stack([u, v]), directed)


def make_corpus(count=200, max_n=60, seed=12345):
    """Erdos-Renyi graphs with random partitions, half of them directed."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        directed = len(out) % 2 == 1
        n = int(rng.integers(6, max_n + 1))
        g = random_graph(rng, n, float(rng.uniform(0.05, 0.5)), directed)
        if g.num_edges < 2:
            continue
        k = int(rng.integers(2, 6))
        out.append((g, Partition(rng.integers(0, k, size=n), k)))
    return out


@pytest.fixture(scope="session")
def corpus():
    return make_corpus()


@pytest.fixture
def two_edges():
    return Graph.from_edges(4, [(0, 1), (2, 3)])


@pytest.fixture
def four_cycle():
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])


@pytest.fixture
def dir_triangle():
    return Graph.from_edges(3, [(0, 1), (1, 2), (2, 0)], directed=True)


@pytest.fixture
def halves():
    return Partition([0, 0, 1, 1])
