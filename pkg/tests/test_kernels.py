"""Parity tests: compiled and fallback kernels must agree bit for bit."""

import math

import numpy as np
import pytest

from hierperc import _pykernels, kernels, model, sampler
from hierperc.streams import STREAM_WALK, substream

try:
    from hierperc import _kernels
except ImportError:
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None,
                               reason="compiled extension not built")


def _random_edges(n, m, seed):
    rng = np.random.default_rng(seed)
    u = rng.integers(0, n, m)
    v = rng.integers(0, n, m)
    keep = u != v
    return u[keep].astype(np.int64), v[keep].astype(np.int64)


class TestUnionLabels:
    def test_empty_graph_identity(self):
        labels = kernels.union_labels(5, [], [])
        assert np.array_equal(labels, np.arange(5))

    def test_two_components(self):
        labels = kernels.union_labels(4, [0, 2], [1, 3])
        assert np.array_equal(labels, [0, 0, 1, 1])

    def test_labels_are_first_occurrence_ordered(self):
        labels = kernels.union_labels(5, [3], [4])
        assert np.array_equal(labels, [0, 1, 2, 3, 3])

    @needs_ext
    def test_parity_random(self):
        for seed in range(5):
            u, v = _random_edges(300, 500, seed)
            a = _kernels.union_labels(300, u, v)
            b = _pykernels.union_labels(300, u, v)
            assert np.array_equal(a, b)


class TestWalkKernel:
    def _setup(self):
        prof = model.ConnectivityProfile(N=2, delta=1.0, C2=6.0, alpha=1.0)
        g = sampler.sample_graph(sampler.SampleConfig(2, 6, prof, seed=3))
        indptr, indices = g.adjacency()
        absorb = (g.distances_from(0) > 4).astype(np.uint8)
        return indptr, indices, absorb

    @needs_ext
    @pytest.mark.parametrize("stop_on_return", [True, False])
    def test_parity(self, stop_on_return):
        indptr, indices, absorb = self._setup()
        key = substream(99, STREAM_WALK)
        a = _kernels.simulate_walks(indptr, indices, 0, absorb, 500, 3000,
                                    key, stop_on_return)
        b = _pykernels.simulate_walks(indptr, indices, 0, absorb, 500, 3000,
                                      key, stop_on_return)
        for x, y in zip(a, b):
            assert np.array_equal(x, y)

    def test_replica_independence_of_order(self):
        # replica r's trajectory only depends on (seed, r)
        indptr, indices, absorb = self._setup()
        full = kernels.simulate_walks(indptr, indices, 0, absorb, 500, 100, 7,
                                      stop_on_return=True)
        small = kernels.simulate_walks(indptr, indices, 0, absorb, 500, 10, 7,
                                       stop_on_return=True)
        for x, y in zip(full, small):
            assert np.array_equal(x[:10], y)

    def test_absorbing_start_rejected(self):
        indptr, indices, absorb = self._setup()
        absorb = absorb.copy()
        absorb[0] = 1
        with pytest.raises(ValueError):
            kernels.simulate_walks(indptr, indices, 0, absorb, 10, 10, 0)

    def test_steps_counted_and_outcomes_consistent(self):
        indptr, indices, absorb = self._setup()
        outcomes, steps, returns, finals = kernels.simulate_walks(
            indptr, indices, 0, absorb, 50, 2000, 11, stop_on_return=True)
        assert ((outcomes == 0) | (outcomes == 1) | (outcomes == 2)).all()
        assert (steps[outcomes != 2] <= 50).all()
        assert (steps[outcomes == 2] == 50).all()
        # escaped walks end on an absorbing vertex, returned ones at start
        assert absorb[finals[outcomes == 0]].all()
        assert (finals[outcomes == 1] == 0).all()
        assert (returns[outcomes == 1] == 1).all()


class TestRenormKernel:
    @needs_ext
    @pytest.mark.parametrize("N", [2, 3, 4, 6])
    @pytest.mark.parametrize("log1m", [math.log1p(-0.3), -math.inf])
    def test_parity(self, N, log1m):
        rng = np.random.default_rng(10 + N)
        pop = rng.random(50)
        pop[:5] = 0.0
        idx = rng.integers(0, 50, size=(4000, N)).astype(np.int64)
        up = rng.random((4000, N * (N - 1) // 2))
        a = _kernels.renorm_population_step(pop, idx, up, log1m, 16.0)
        b = _pykernels.renorm_population_step(pop, idx, up, log1m, 16.0)
        assert np.array_equal(a, b)

    def test_forced_connection_averages(self):
        # log1m = -inf encodes per-pair probability 1 (positive masses)
        pop = np.array([0.25, 0.75])
        idx = np.array([[0, 1], [1, 1], [0, 0]], dtype=np.int64)
        up = np.zeros((3, 1))
        out = kernels.renorm_population_step(pop, idx, up, -math.inf, 1.0)
        assert np.allclose(out, [0.5, 0.75, 0.25])

    def test_forced_isolation_takes_max(self):
        # probability 0 on every pair: heaviest singleton over N
        pop = np.array([0.25, 0.75])
        idx = np.array([[0, 1], [1, 0]], dtype=np.int64)
        up = np.full((2, 1), 0.999999)
        out = kernels.renorm_population_step(pop, idx, up, math.log1p(-1e-12), 1.0)
        assert np.allclose(out, [0.375, 0.375])

    def test_mass_maximal_selection_n3(self):
        # vertices 0,1 linked (mass 0.5), vertex 2 isolated with mass 0.4:
        # the pair wins by mass even though a cardinality tie is impossible
        pop = np.array([0.25, 0.25, 0.4])
        idx = np.array([[0, 1, 2]], dtype=np.int64)
        # pairs in order (0,1), (0,2), (1,2): connect only (0,1)
        up = np.array([[0.0, 0.99, 0.99]])
        out = kernels.renorm_population_step(pop, idx, up, math.log1p(-0.5), 1.0)
        assert out[0] == pytest.approx(0.5 / 3.0)


class TestDispatch:
    def test_implementation_reported(self):
        assert kernels.IMPLEMENTATION in ("cython", "python")

    def test_env_var_forces_fallback(self):
        import os
        import subprocess
        import sys

        env = dict(os.environ, HIERPERC_PURE_PYTHON="1")
        out = subprocess.run(
            [sys.executable, "-c",
             "from hierperc import kernels; print(kernels.IMPLEMENTATION)"],
            env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "python"
