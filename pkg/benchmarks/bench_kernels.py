#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Run after `pip install -e . --no-build-isolation`:

    python benchmarks/bench_kernels.py

Both implementations produce identical results (asserted here as well); the
table reports wall time and speedup per kernel.
"""

import math
import time

import numpy as np

from hierperc import _pykernels, model, sampler
from hierperc.streams import STREAM_WALK, substream

try:
    from hierperc import _kernels
except ImportError:
    _kernels = None


def timeit(fn, repeat=3):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_union(impl):
    rng = np.random.default_rng(0)
    n, m = 1_000_000, 2_000_000
    u = rng.integers(0, n, m)
    v = rng.integers(0, n, m)
    keep = u != v
    u = u[keep].astype(np.int64)
    v = v[keep].astype(np.int64)
    return lambda: impl.union_labels(n, u, v)


def bench_walks(impl):
    prof = model.ConnectivityProfile(N=2, delta=1.0, C2=8.0, alpha=1.0)
    g = sampler.sample_graph(sampler.SampleConfig(2, 12, prof, seed=1))
    indptr, indices = g.adjacency()
    absorb = (g.distances_from(0) > 10).astype(np.uint8)
    key = substream(7, STREAM_WALK)
    return lambda: impl.simulate_walks(indptr, indices, 0, absorb, 10_000,
                                       20_000, key, True)


def bench_renorm(impl, N):
    rng = np.random.default_rng(1)
    pop = rng.random(100_000)
    idx = rng.integers(0, pop.size, size=(200_000, N)).astype(np.int64)
    up = rng.random((200_000, N * (N - 1) // 2))
    log1m = math.log1p(-0.01)
    scale = float(2) ** (2 * 7)
    return lambda: impl.renorm_population_step(pop, idx, up, log1m, scale)


def main():
    cases = [
        ("union_labels (1M vertices, 2M edges)", bench_union),
        ("simulate_walks (20k replicas)", bench_walks),
        ("renorm_step N=2 (200k draws)", lambda impl: bench_renorm(impl, 2)),
        ("renorm_step N=3 (200k draws)", lambda impl: bench_renorm(impl, 3)),
    ]
    print(f"{'kernel':42s} {'python':>10s} {'cython':>10s} {'speedup':>9s}")
    for name, make in cases:
        t_py, out_py = timeit(make(_pykernels))
        if _kernels is None:
            print(f"{name:42s} {t_py:9.3f}s {'n/a':>10s} {'n/a':>9s}")
            continue
        t_cy, out_cy = timeit(make(_kernels))
        a = out_py if isinstance(out_py, np.ndarray) else out_py[0]
        b = out_cy if isinstance(out_cy, np.ndarray) else out_cy[0]
        assert np.array_equal(a, b), f"implementations disagree on {name}"
        print(f"{name:42s} {t_py:9.3f}s {t_cy:9.3f}s {t_py / t_cy:8.1f}x")
    if _kernels is None:
        print("\ncompiled extension not built; install without "
              "HIERPERC_SKIP_EXT to compare")


if __name__ == "__main__":
    main()
