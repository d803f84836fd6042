"""Numpy fallback implementations of the hot kernels.

Selected by `hierperc.kernels` when the compiled extension is unavailable or
HIERPERC_PURE_PYTHON is set.  Every routine is a deterministic function of
its array arguments and must match the compiled versions result for result:
the random walk consumes exactly one splitmix64 word per replica per step,
and floating point expressions use the same operation grouping.
"""

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .streams import GAMMA_U64, U01_SCALE, derive_key_array, mix64_array

IMPLEMENTATION = "python"


def _canonical_labels(raw: np.ndarray) -> np.ndarray:
    """Relabel components 0..c-1 in order of first vertex occurrence."""
    n = raw.shape[0]
    ncomp = int(raw.max()) + 1 if n else 0
    first = np.full(ncomp, n, dtype=np.int64)
    np.minimum.at(first, raw, np.arange(n, dtype=np.int64))
    order = np.argsort(first, kind="stable")
    rank = np.empty(ncomp, dtype=np.int64)
    rank[order] = np.arange(ncomp, dtype=np.int64)
    return rank[raw]


def union_labels(n: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Connected-component label per vertex, first-occurrence numbering."""
    if len(u) == 0:
        return np.arange(n, dtype=np.int64)
    data = np.ones(len(u), dtype=np.int8)
    adj = coo_matrix((data, (u, v)), shape=(n, n))
    _, raw = connected_components(adj, directed=False)
    return _canonical_labels(raw.astype(np.int64))


def simulate_walks(indptr, indices, start, absorb, max_steps, replicas, seed,
                   stop_on_return):
    """Nearest-neighbour walks from `start`, one uniform word per step.

    Replica r runs on splitmix64 substream r of `seed`.  Outcome codes:
    0 absorbed in `absorb`, 1 stopped on first return to start (only when
    stop_on_return), 2 exhausted max_steps.  Returns to start are counted in
    all modes.  Vectorised across replicas; consumption order per replica is
    identical to the sequential compiled kernel.
    """
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    absorb = np.asarray(absorb, dtype=bool)
    states = derive_key_array(seed, np.arange(replicas, dtype=np.uint64))
    cur = np.full(replicas, start, dtype=np.int64)
    outcomes = np.full(replicas, 2, dtype=np.uint8)
    steps = np.zeros(replicas, dtype=np.int64)
    returns = np.zeros(replicas, dtype=np.int64)
    finals = np.full(replicas, start, dtype=np.int64)
    active = np.arange(replicas, dtype=np.int64)
    for _ in range(max_steps):
        if active.size == 0:
            break
        states[active] += GAMMA_U64
        z = mix64_array(states[active])
        u = (z >> np.uint64(11)).astype(np.float64) * U01_SCALE
        c = cur[active]
        off = indptr[c]
        deg = (indptr[c + 1] - off).astype(np.float64)
        nxt = indices[off + (u * deg).astype(np.int64)]
        steps[active] += 1
        cur[active] = nxt
        finals[active] = nxt
        hit = absorb[nxt]
        back = nxt == start
        returns[active] += back.astype(np.int64)
        outcomes[active[hit]] = 0
        if stop_on_return:
            outcomes[active[back & ~hit]] = 1
            done = hit | back
        else:
            done = hit
        active = active[~done]
    return outcomes, steps, returns, finals


def _connect_prob(x1, x2, log1m_base, scale):
    # Same expression tree as the compiled kernel: ((scale*x1)*x2)*log1m.
    if np.isinf(log1m_base):
        return (x1 * x2 > 0).astype(np.float64)
    t = (scale * x1) * x2
    return -np.expm1(t * log1m_base)


def renorm_population_step(pop, idx, upair, log1m_base, scale):
    """One density-recursion step over a batch of size idx.shape[0].

    Per output sample: take the N densities pop[idx[s]], link pair (i, j)
    when upair[s, t] < p(x_i, x_j) with pairs enumerated i < j in
    lexicographic order, then emit (mass of the heaviest component) / N.
    """
    pop = np.asarray(pop, dtype=np.float64)
    idx = np.asarray(idx, dtype=np.int64)
    upair = np.asarray(upair, dtype=np.float64)
    n_out, N = idx.shape
    if N == 2:
        x1 = pop[idx[:, 0]]
        x2 = pop[idx[:, 1]]
        p = _connect_prob(x1, x2, log1m_base, scale)
        linked = upair[:, 0] < p
        return np.where(linked, (x1 + x2) / 2.0, np.maximum(x1, x2) / 2.0)
    out = np.empty(n_out, dtype=np.float64)
    xs = np.empty(N, dtype=np.float64)
    parent = np.empty(N, dtype=np.int64)
    inf_base = bool(np.isinf(log1m_base))
    for s in range(n_out):
        xs[:] = pop[idx[s]]
        parent[:] = np.arange(N)
        t = 0
        urow = upair[s]
        for i in range(N - 1):
            for j in range(i + 1, N):
                if inf_base:
                    p = 1.0 if xs[i] * xs[j] > 0 else 0.0
                else:
                    p = -np.expm1(((scale * xs[i]) * xs[j]) * log1m_base)
                if urow[t] < p:
                    a, b = i, j
                    while parent[a] != a:
                        a = parent[a]
                    while parent[b] != b:
                        b = parent[b]
                    if a != b:
                        parent[max(a, b)] = min(a, b)
                t += 1
        mass = np.zeros(N, dtype=np.float64)
        for i in range(N):
            a = i
            while parent[a] != a:
                a = parent[a]
            mass[a] += xs[i]
        out[s] = mass.max() / N
    return out
