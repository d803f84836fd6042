# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: union-find labelling, walk simulation, recursion step.

Mirrors hierperc._pykernels exactly; see that module for the contracts.
"""

import numpy as np

from libc.math cimport expm1, isinf
from libc.stdint cimport int64_t, uint8_t, uint64_t

IMPLEMENTATION = "cython"

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15UL
cdef double U01 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z ^= z >> 30
    z *= 0xBF58476D1CE4E5B9UL
    z ^= z >> 27
    z *= 0x94D049BB133111EBUL
    z ^= z >> 31
    return z


cdef inline uint64_t _derive(uint64_t seed, uint64_t idx) nogil:
    return _mix64(seed + GAMMA * (idx + 1UL))


cdef inline int64_t _find(int64_t[::1] parent, int64_t a) nogil:
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def union_labels(Py_ssize_t n, int64_t[::1] u, int64_t[::1] v):
    """Connected-component label per vertex, first-occurrence numbering."""
    parent_arr = np.arange(n, dtype=np.int64)
    rank_arr = np.zeros(n, dtype=np.int8)
    out_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] parent = parent_arr
    cdef signed char[::1] rank = rank_arr
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t i, m = u.shape[0]
    cdef int64_t ra, rb, next_label = 0, r
    for i in range(m):
        ra = _find(parent, u[i])
        rb = _find(parent, v[i])
        if ra == rb:
            continue
        if rank[ra] < rank[rb]:
            parent[ra] = rb
        elif rank[ra] > rank[rb]:
            parent[rb] = ra
        else:
            parent[rb] = ra
            rank[ra] += 1
    # reuse out as the root -> label map, written on first encounter
    label_arr = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] label = label_arr
    for i in range(n):
        r = _find(parent, i)
        if label[r] < 0:
            label[r] = next_label
            next_label += 1
        out[i] = label[r]
    return out_arr


def simulate_walks(int64_t[::1] indptr, int64_t[::1] indices, int64_t start,
                   uint8_t[::1] absorb, int64_t max_steps, Py_ssize_t replicas,
                   uint64_t seed, bint stop_on_return):
    """Nearest-neighbour walks; one splitmix64 word per replica per step."""
    outcomes_arr = np.full(replicas, 2, dtype=np.uint8)
    steps_arr = np.zeros(replicas, dtype=np.int64)
    returns_arr = np.zeros(replicas, dtype=np.int64)
    finals_arr = np.full(replicas, start, dtype=np.int64)
    cdef uint8_t[::1] outcomes = outcomes_arr
    cdef int64_t[::1] steps = steps_arr
    cdef int64_t[::1] returns = returns_arr
    cdef int64_t[::1] finals = finals_arr
    cdef Py_ssize_t r
    cdef uint64_t state, z
    cdef int64_t cur, nxt, off, deg, stp, ret
    cdef double u
    cdef uint8_t outcome
    with nogil:
        for r in range(replicas):
            state = _derive(seed, <uint64_t>r)
            cur = start
            outcome = 2
            stp = 0
            ret = 0
            while stp < max_steps:
                state += GAMMA
                z = _mix64(state)
                u = <double>(z >> 11) * U01
                off = indptr[cur]
                deg = indptr[cur + 1] - off
                nxt = indices[off + <int64_t>(u * <double>deg)]
                stp += 1
                cur = nxt
                if absorb[nxt]:
                    outcome = 0
                    break
                if nxt == start:
                    ret += 1
                    if stop_on_return:
                        outcome = 1
                        break
            outcomes[r] = outcome
            steps[r] = stp
            returns[r] = ret
            finals[r] = cur
    return outcomes_arr, steps_arr, returns_arr, finals_arr


def renorm_population_step(double[::1] pop, int64_t[:, ::1] idx,
                           double[:, ::1] upair, double log1m_base,
                           double scale):
    """One density-recursion step; pairs enumerated i < j lexicographically."""
    cdef Py_ssize_t n_out = idx.shape[0]
    cdef Py_ssize_t N = idx.shape[1]
    if N > 64:
        raise ValueError("kernel supports N <= 64")
    out_arr = np.empty(n_out, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double xs[64]
    cdef int64_t parent[64]
    cdef double mass[64]
    cdef Py_ssize_t s, i, j, t
    cdef int64_t a, b, tmp
    cdef double p, best, x1, x2
    cdef bint inf_base = isinf(log1m_base)
    cdef double nn = <double>N
    with nogil:
        for s in range(n_out):
            for i in range(N):
                xs[i] = pop[idx[s, i]]
                parent[i] = i
            t = 0
            for i in range(N - 1):
                for j in range(i + 1, N):
                    x1 = xs[i]
                    x2 = xs[j]
                    if inf_base:
                        p = 1.0 if x1 * x2 > 0 else 0.0
                    else:
                        p = -expm1(((scale * x1) * x2) * log1m_base)
                    if upair[s, t] < p:
                        a = i
                        while parent[a] != a:
                            a = parent[a]
                        b = j
                        while parent[b] != b:
                            b = parent[b]
                        if a != b:
                            if a < b:
                                parent[b] = a
                            else:
                                parent[a] = b
                    t += 1
            for i in range(N):
                mass[i] = 0.0
            for i in range(N):
                a = i
                while parent[a] != a:
                    a = parent[a]
                mass[a] += xs[i]
            best = mass[0]
            for i in range(1, N):
                if mass[i] > best:
                    best = mass[i]
            out[s] = best / nn
    return out_arr
