import itertools

import numpy as np
import pytest
from scipy import stats

from hierperc import model
from hierperc.errors import (CapacityError, CouplingOrderError,
                             GraphParseError, InvalidInputError)
from hierperc.model import ConnectivityProfile
from hierperc.sampler import (PercolationGraph, SampleConfig, load_graph,
                              sample_graph, save_graph, thin_graph)
from hierperc.space import hdist_ids, shell_pair_count


def prof(**kw):
    base = dict(N=2, delta=1.0, C2=1.0, alpha=1.0)
    base.update(kw)
    return ConnectivityProfile(**base)


class TestSampleGraph:
    def test_determinism_bit_identical(self):
        cfg = SampleConfig(2, 6, prof(C2=4.0), seed=777)
        a = sample_graph(cfg)
        b = sample_graph(cfg)
        assert a == b

    def test_different_seeds_differ(self):
        a = sample_graph(SampleConfig(2, 6, prof(C2=4.0), seed=1))
        b = sample_graph(SampleConfig(2, 6, prof(C2=4.0), seed=2))
        assert a != b

    def test_effectively_zero_law_gives_empty_graph(self):
        p = ConnectivityProfile(N=2, delta=1.0, C0=1e-12)
        g = sample_graph(SampleConfig(2, 5, p, seed=5))
        assert g.edge_count == 0

    def test_clamped_law_gives_complete_graph(self):
        p = ConnectivityProfile(N=2, delta=1.0, C0=1e9)
        g = sample_graph(SampleConfig(2, 3, p, seed=5))
        n = 8
        assert g.edge_count == n * (n - 1) // 2

    def test_budget_error(self):
        cfg = SampleConfig(2, 26, prof(), seed=1)
        with pytest.raises(CapacityError):
            sample_graph(cfg)

    def test_edge_distances_annotated_correctly(self, small_graph):
        g = small_graph
        for u, v, d in zip(g.edges_u, g.edges_v, g.edges_dist):
            assert hdist_ids(int(u), int(v), g.N) == d

    def test_no_duplicates_or_self_loops(self, small_graph):
        g = small_graph
        assert (g.edges_u < g.edges_v).all()
        keys = g.edges_u * g.n_vertices + g.edges_v
        assert len(np.unique(keys)) == g.edge_count

    def test_adjacency_consistent_with_edges(self, small_graph):
        g = small_graph
        indptr, indices = g.adjacency()
        assert indptr[-1] == 2 * g.edge_count
        degs = g.degrees()
        assert degs.sum() == 2 * g.edge_count
        # spot-check neighbourhoods
        for v in (0, 1, 5):
            nbrs = set(indices[indptr[v]:indptr[v + 1]].tolist())
            expect = set(g.edges_v[g.edges_u == v].tolist()) | set(
                g.edges_u[g.edges_v == v].tolist())
            assert nbrs == expect

    def test_per_shell_counts_match_binomial_mean(self):
        # mean count per distance class within 3 sigma over replicas
        p = prof(C2=2.0, alpha=1.0)
        depth, reps = 5, 400
        counts = np.zeros((reps, depth))
        for r in range(reps):
            g = sample_graph(SampleConfig(2, depth, p, seed=9000 + r))
            for j in range(1, depth + 1):
                counts[r, j - 1] = int((g.edges_dist == j).sum())
        for j in range(1, depth + 1):
            m = shell_pair_count(2, depth, j)
            pj = model.edge_prob(p, j)
            mean, var = m * pj, m * pj * (1 - pj)
            se = np.sqrt(var / reps) if var > 0 else 1e-9
            assert abs(counts[:, j - 1].mean() - mean) <= 3 * se + 1e-9


class TestThinGraph:
    def test_identity_when_target_equals_source(self):
        g = sample_graph(SampleConfig(2, 6, prof(C2=4.0, alpha=2.0), seed=3))
        t = thin_graph(g, g.provenance.profile, seed=55)
        assert np.array_equal(t.edges_u, g.edges_u)
        assert np.array_equal(t.edges_v, g.edges_v)

    def test_zero_ratio_empties_graph(self):
        g = sample_graph(SampleConfig(2, 5, prof(C0=0.0, C2=4.0), seed=3))
        t = thin_graph(g, prof(C2=1e-300), seed=55)
        assert t.edge_count == 0

    def test_subset_property_many_seeds(self):
        src = prof(C2=10.0, alpha=2.0)
        tgt = prof(C2=10.0, alpha=1.0)
        for seed in range(30):
            g = sample_graph(SampleConfig(2, 6, src, seed=seed))
            t = thin_graph(g, tgt, seed=seed + 1000)
            n = g.n_vertices
            gk = set((g.edges_u * n + g.edges_v).tolist())
            tk = set((t.edges_u * n + t.edges_v).tolist())
            assert tk <= gk

    def test_coupling_order_violation_rejected(self):
        g = sample_graph(SampleConfig(2, 5, prof(C2=1.0, alpha=1.0), seed=3))
        with pytest.raises(CouplingOrderError):
            thin_graph(g, prof(C2=2.0, alpha=1.0), seed=0)
        with pytest.raises(CouplingOrderError):
            thin_graph(g, ConnectivityProfile(N=2, delta=0.5, C2=1.0), seed=0)

    def test_marginal_law_matches_fresh_samples(self):
        # per-shell mean counts of thinned vs fresh target samples, 3 sigma
        src = prof(C2=10.0, alpha=2.0)
        tgt = prof(C2=10.0, alpha=1.0)
        depth, reps = 6, 300
        thinned = np.zeros((reps, depth))
        fresh = np.zeros((reps, depth))
        for r in range(reps):
            g = sample_graph(SampleConfig(2, depth, src, seed=20000 + r))
            t = thin_graph(g, tgt, seed=30000 + r)
            f = sample_graph(SampleConfig(2, depth, tgt, seed=40000 + r))
            for j in range(1, depth + 1):
                thinned[r, j - 1] = (t.edges_dist == j).sum()
                fresh[r, j - 1] = (f.edges_dist == j).sum()
        for j in range(depth):
            diff = thinned[:, j].mean() - fresh[:, j].mean()
            se = np.sqrt(thinned[:, j].var(ddof=1) / reps
                         + fresh[:, j].var(ddof=1) / reps)
            assert abs(diff) <= 3 * se + 1e-9


class TestSaveLoad:
    def test_round_trip(self, tmp_path, small_graph):
        path = tmp_path / "g.hpg"
        save_graph(small_graph, path)
        loaded = load_graph(path)
        assert loaded == small_graph

    def test_round_trip_bytes_stable(self, tmp_path, small_graph):
        p1, p2 = tmp_path / "a.hpg", tmp_path / "b.hpg"
        save_graph(small_graph, p1)
        save_graph(load_graph(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_empty_graph_round_trip(self, tmp_path):
        p = ConnectivityProfile(N=2, delta=1.0, C0=1e-12)
        g = sample_graph(SampleConfig(2, 4, p, seed=5))
        path = tmp_path / "empty.hpg"
        save_graph(g, path)
        assert load_graph(path) == g

    def test_inconsistent_distance_rejected(self, tmp_path):
        path = tmp_path / "bad.hpg"
        path.write_text(
            "hpg1 N=2 k=3 seed=1 delta=1.0 C0=0.0 C1=0.0 C2=1.0 alpha=1.0\n"
            "0 1 3\n"
        )
        with pytest.raises(GraphParseError) as exc:
            load_graph(path)
        assert exc.value.line_number == 2

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "bad.hpg"
        path.write_text(
            "hpg1 N=2 k=3 seed=1 delta=1.0 C0=0.0 C1=0.0 C2=1.0 alpha=1.0\n"
            "0 1 1\n"
            "oops\n"
        )
        with pytest.raises(GraphParseError) as exc:
            load_graph(path)
        assert exc.value.line_number == 3

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.hpg"
        path.write_text("nope N=2\n")
        with pytest.raises(GraphParseError):
            load_graph(path)


class TestFromEdgeList:
    def test_distances_derived(self):
        g = PercolationGraph.from_edge_list(2, 2, [(0, 1), (1, 3)])
        assert g.edges_dist.tolist() == [1, 2]

    def test_duplicate_rejected(self):
        with pytest.raises(InvalidInputError):
            PercolationGraph.from_edge_list(2, 2, [(0, 1), (1, 0)])

    def test_self_loop_rejected(self):
        with pytest.raises(InvalidInputError):
            PercolationGraph.from_edge_list(2, 2, [(1, 1)])


class TestDistributionalExactness:
    def test_full_indicator_chi_square_small(self):
        # same construction as the acceptance criterion, smaller sample:
        # the 6 pair indicators on the N=2, k=2 ball against the product law
        p = prof(C2=1.0, alpha=1.0)
        pairs = list(itertools.combinations(range(4), 2))
        probs = {1: model.edge_prob(p, 1), 2: model.edge_prob(p, 2)}
        n_samples = 20000
        counts = np.zeros(64, dtype=np.int64)
        for s in range(n_samples):
            g = sample_graph(SampleConfig(2, 2, p, seed=s))
            present = set(zip(g.edges_u.tolist(), g.edges_v.tolist()))
            word = 0
            for b, pr in enumerate(pairs):
                if pr in present:
                    word |= 1 << b
            counts[word] += 1
        expected = np.empty(64)
        for word in range(64):
            prob = 1.0
            for b, pr in enumerate(pairs):
                d = hdist_ids(pr[0], pr[1], 2)
                prob *= probs[d] if word >> b & 1 else 1.0 - probs[d]
            expected[word] = prob * n_samples
        stat = ((counts - expected) ** 2 / expected).sum()
        pvalue = stats.chi2.sf(stat, df=63)
        assert pvalue > 1e-3
