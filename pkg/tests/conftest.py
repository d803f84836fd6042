import pytest

from hierperc.model import ConnectivityProfile
from hierperc.sampler import PercolationGraph, SampleConfig, sample_graph


@pytest.fixture
def critical_profile():
    return ConnectivityProfile(N=2, delta=1.0, C2=4.0, alpha=1.0)


@pytest.fixture
def small_graph(critical_profile):
    return sample_graph(SampleConfig(2, 6, critical_profile, seed=12345))


def path_graph(ids=(0, 1, 3), N=2, depth=2):
    """Path through the given vertex ids embedded in the lattice."""
    pairs = list(zip(ids, ids[1:]))
    return PercolationGraph.from_edge_list(N, depth, pairs)


def exhaustive_er_connected(n, q):
    """Oracle: P(G(n, 1-q) connected) by summing over all labeled graphs."""
    import itertools

    pairs = list(itertools.combinations(range(n), 2))
    total = 0.0
    p = 1.0 - q
    for mask in range(1 << len(pairs)):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        prob = 1.0
        for b, (i, j) in enumerate(pairs):
            if mask >> b & 1:
                prob *= p
                parent[find(i)] = find(j)
            else:
                prob *= q
        if len({find(x) for x in range(n)}) == 1:
            total += prob
    return total
