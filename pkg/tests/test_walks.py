import math

import numpy as np
import pytest
from scipy import stats

from hierperc.errors import InvalidInputError
from hierperc.model import ConnectivityProfile
from hierperc.sampler import PercolationGraph, SampleConfig, sample_graph
from hierperc.streams import GOLDEN_GAMMA, MASK64, mix64, substream
from hierperc.walks import (WalkConfig, escape_probability,
                            first_step_distribution, mc_resistance,
                            return_statistics)


def path_fixture():
    # 0 - 1 - 3 inside the depth-2 ball; hdist(0,1)=1, hdist(1,3)=2
    return PercolationGraph.from_edge_list(2, 2, [(0, 1), (1, 3)])


class TestEscapeProbability:
    def test_forced_first_step(self):
        g = PercolationGraph.from_edge_list(2, 1, [(0, 1)])
        cfg = WalkConfig(start=0, max_steps=10, replicas=2000, seed=1)
        est = escape_probability(g, cfg, shell=0)
        assert est.estimate == 1.0
        assert est.censored == 0

    def test_path_first_step_analysis(self):
        # from the middle of a 3-path both ends absorb equally: 1/2
        g = path_fixture()
        cfg = WalkConfig(start=0, max_steps=10000, replicas=100000, seed=2)
        est = escape_probability(g, cfg, shell=1)
        assert abs(est.estimate - 0.5) <= 3 * est.std_error

    def test_escape_conductance_identity_on_sample(self):
        p = ConnectivityProfile(N=2, delta=1.0, C2=6.0, alpha=1.0)
        g = sample_graph(SampleConfig(2, 6, p, seed=17))
        shell = 4
        cfg = WalkConfig(start=0, max_steps=20000, replicas=60000, seed=3)
        est = escape_probability(g, cfg, shell=shell)
        from hierperc.electrical import resistance_profile

        results, _ = resistance_profile(g, [shell], tol=1e-10)
        R = results[0].estimate.value
        deg = int(g.degrees()[0])
        target = 1.0 / (deg * R)
        assert abs(est.estimate - target) <= 3 * est.std_error

    def test_unreachable_shell_rejected(self):
        g = path_fixture()
        cfg = WalkConfig(start=0, max_steps=10, replicas=10, seed=1)
        with pytest.raises(InvalidInputError):
            escape_probability(g, cfg, shell=2)

    def test_degree_zero_start_rejected(self):
        g = PercolationGraph.from_edge_list(2, 2, [(1, 3)])
        cfg = WalkConfig(start=0, max_steps=10, replicas=10, seed=1)
        with pytest.raises(InvalidInputError):
            escape_probability(g, cfg, shell=1)

    def test_censoring_reported_not_folded(self):
        # star 0-1 / 0-2 with Z = {2}: a one-step budget strands every walk
        # that went to 1, so about half the replicas are censored
        g = PercolationGraph.from_edge_list(2, 2, [(0, 1), (0, 2)])
        cfg = WalkConfig(start=0, max_steps=1, replicas=5000, seed=4)
        est = escape_probability(g, cfg, shell=1)
        assert est.censored == 5000 - est.escapes - est.returns
        assert est.censored > 0
        assert est.returns == 0
        # the estimate uses decided replicas only
        assert est.estimate == 1.0


class TestReturnStatistics:
    def test_single_edge_zero_returns(self):
        g = PercolationGraph.from_edge_list(2, 1, [(0, 1)])
        cfg = WalkConfig(start=0, max_steps=10, replicas=3000, seed=5)
        stats_ = return_statistics(g, cfg)
        assert stats_.deepest_shell == 1
        assert (stats_.returns == 0).all()
        assert stats_.outcome_counts()["escape"] == 3000

    def test_path_geometric_returns(self):
        # returns before absorption are Geometric(1/2): mean 1
        g = path_fixture()
        cfg = WalkConfig(start=0, max_steps=100000, replicas=100000, seed=6)
        stats_ = return_statistics(g, cfg)
        counts = stats_.returns[stats_.outcomes == 0]
        assert counts.size == 100000  # no censoring at this budget
        mean = counts.mean()
        se = counts.std(ddof=1) / math.sqrt(counts.size)
        assert abs(mean - 1.0) <= 3 * se
        # frozen geometric pmf check on small counts
        for k in range(4):
            freq = (counts == k).mean()
            expect = 0.5 ** (k + 1)
            se_k = math.sqrt(expect * (1 - expect) / counts.size)
            assert abs(freq - expect) <= 4 * se_k

    def test_rough_alpha_ordering_of_returns(self):
        # sparse (small alpha) clusters return more often than dense ones
        base = dict(N=2, delta=1.0, C2=8.0)
        lo = ConnectivityProfile(alpha=0.5, **base)
        hi = ConnectivityProfile(alpha=8.0, **base)
        lo_meds, hi_meds = [], []
        for seed in range(10):
            g_lo = sample_graph(SampleConfig(2, 8, lo, seed=400 + seed))
            g_hi = sample_graph(SampleConfig(2, 8, hi, seed=400 + seed))
            cfg = WalkConfig(start=0, max_steps=20000, replicas=200,
                             seed=7 + seed)
            lo_meds.append(return_statistics(g_lo, cfg).median_returns)
            hi_meds.append(return_statistics(g_hi, cfg).median_returns)
        assert np.median(lo_meds) > np.median(hi_meds)


class TestStepLaw:
    def test_first_step_uniform_chi_square(self):
        p = ConnectivityProfile(N=2, delta=1.0, C2=8.0, alpha=1.0)
        g = sample_graph(SampleConfig(2, 5, p, seed=23))
        deg = int(g.degrees()[0])
        assert deg >= 3
        n = 100000
        counts = first_step_distribution(g, 0, n, seed=8)
        nbr_counts = counts[counts > 0]
        assert nbr_counts.sum() == n
        assert nbr_counts.size == deg
        expected = n / deg
        stat = ((nbr_counts - expected) ** 2 / expected).sum()
        pvalue = stats.chi2.sf(stat, df=deg - 1)
        assert pvalue > 1e-3

    def test_reversibility_crossing_counts(self):
        # long trajectory on a small fixture: directed crossings of each
        # edge agree within 3 sigma (detailed balance of the uniform step)
        g = PercolationGraph.from_edge_list(
            2, 3, [(0, 1), (1, 2), (2, 3), (0, 2), (4, 5), (0, 4)]
        )
        indptr, indices = g.adjacency()
        state = substream(9, 99)
        cur = 0
        steps = 200000
        cross = {}
        for _ in range(steps):
            state = (state + GOLDEN_GAMMA) & MASK64
            z = mix64(state)
            u = (z >> 11) * (1.0 / 9007199254740992.0)
            deg = indptr[cur + 1] - indptr[cur]
            nxt = int(indices[indptr[cur] + int(u * deg)])
            cross[(cur, nxt)] = cross.get((cur, nxt), 0) + 1
            cur = nxt
        for u_, v_ in zip(g.edges_u.tolist(), g.edges_v.tolist()):
            a = cross.get((u_, v_), 0)
            b = cross.get((v_, u_), 0)
            # difference of two near-equal counts: null sd ~ sqrt(a + b)
            assert abs(a - b) <= 3 * math.sqrt(a + b) + 1


class TestMcResistance:
    def test_cross_check_against_solver(self):
        p = ConnectivityProfile(N=2, delta=1.0, C2=6.0, alpha=1.0)
        g = sample_graph(SampleConfig(2, 6, p, seed=17))
        cfg = WalkConfig(start=0, max_steps=20000, replicas=60000, seed=10)
        est = mc_resistance(g, cfg, shell=4)
        assert est.method == "monte-carlo"
        from hierperc.electrical import resistance_profile

        results, _ = resistance_profile(g, [4], tol=1e-10)
        R = results[0].estimate.value
        assert abs(est.value - R) <= 3 * est.residual
