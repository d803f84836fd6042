"""Exact sampling of the percolation graph on a ball of the hierarchical lattice.

The graph on N**depth vertices has every unordered pair at hierarchical
distance j present independently with the distance-j edge probability.  We
never loop over the Theta(N**(2 depth)) pairs: for each distance class j the
number of edges is drawn from the exact Binomial(m_j, p_j) law and that many
distinct pairs are then placed uniformly (count-then-place), which is
distributionally identical to per-pair Bernoulli sampling.  Each distance
class uses its own seed substream, so classes can be sampled in any order.
"""

from dataclasses import dataclass

import numpy as np

from . import model
from .errors import (CapacityError, CouplingOrderError, GraphParseError,
                     InvalidInputError)
from .model import ConnectivityProfile
from .space import DEFAULT_VERTEX_BUDGET, hdist_from, hdist_ids, shell_pair_count
from .streams import STREAM_SHELL, STREAM_THIN, exact_binomial, generator

DEFAULT_EDGE_BUDGET = 1 << 26


@dataclass(frozen=True)
class SampleConfig:
    """Everything that determines a sampled graph bit for bit."""

    N: int
    depth: int
    profile: ConnectivityProfile
    seed: int
    vertex_budget: int = DEFAULT_VERTEX_BUDGET

    def __post_init__(self):
        if self.N != self.profile.N:
            raise InvalidInputError("config N must match profile N")
        if self.depth < 1:
            raise InvalidInputError("depth must be >= 1")
        if not 0 <= self.seed <= 0xFFFFFFFFFFFFFFFF:
            raise InvalidInputError("seed must be an unsigned 64-bit integer")

    @property
    def n_vertices(self) -> int:
        return self.N**self.depth

    def check_budget(self):
        if self.n_vertices > self.vertex_budget:
            raise CapacityError(
                f"{self.N}**{self.depth} vertices exceed budget {self.vertex_budget}"
            )


class PercolationGraph:
    """Sampled edge set on N**depth vertices with per-edge distances.

    Edges are kept in canonical order (sorted by (u, v), u < v); the CSR
    adjacency is built lazily and cached.  Instances are immutable in intent:
    no method mutates the edge arrays after construction.
    """

    def __init__(self, N, depth, edges_u, edges_v, edges_dist, provenance):
        self.N = int(N)
        self.depth = int(depth)
        u = np.asarray(edges_u, dtype=np.int64)
        v = np.asarray(edges_v, dtype=np.int64)
        d = np.asarray(edges_dist, dtype=np.int64)
        if not (u.shape == v.shape == d.shape):
            raise InvalidInputError("edge arrays must have equal length")
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        order = np.lexsort((hi, lo))
        self.edges_u = np.ascontiguousarray(lo[order])
        self.edges_v = np.ascontiguousarray(hi[order])
        self.edges_dist = np.ascontiguousarray(d[order])
        self.provenance = provenance
        self._adj = None
        self._validate()

    def _validate(self):
        n = self.n_vertices
        if self.edge_count == 0:
            return
        if self.edges_u.min() < 0 or self.edges_v.max() >= n:
            raise InvalidInputError("edge endpoint outside vertex range")
        if (self.edges_u == self.edges_v).any():
            raise InvalidInputError("self-loops are not allowed")
        key = self.edges_u * n + self.edges_v
        if (np.diff(key) == 0).any():
            raise InvalidInputError("duplicate edges are not allowed")

    @property
    def n_vertices(self) -> int:
        return self.N**self.depth

    @property
    def edge_count(self) -> int:
        return int(self.edges_u.shape[0])

    def adjacency(self):
        """CSR arrays (indptr, indices) of the undirected graph."""
        if self._adj is None:
            n = self.n_vertices
            deg = np.bincount(self.edges_u, minlength=n) + np.bincount(
                self.edges_v, minlength=n
            )
            indptr = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(deg, out=indptr[1:])
            src = np.concatenate([self.edges_u, self.edges_v])
            dst = np.concatenate([self.edges_v, self.edges_u])
            order = np.argsort(src, kind="stable")
            self._adj = (indptr, np.ascontiguousarray(dst[order]))
        return self._adj

    def degrees(self) -> np.ndarray:
        indptr, _ = self.adjacency()
        return np.diff(indptr)

    def distances_from(self, center: int) -> np.ndarray:
        return hdist_from(np.arange(self.n_vertices, dtype=np.int64), center, self.N)

    def __eq__(self, other):
        if not isinstance(other, PercolationGraph):
            return NotImplemented
        return (
            self.N == other.N
            and self.depth == other.depth
            and np.array_equal(self.edges_u, other.edges_u)
            and np.array_equal(self.edges_v, other.edges_v)
            and np.array_equal(self.edges_dist, other.edges_dist)
            and self.provenance == other.provenance
        )

    def __repr__(self):
        return (
            f"PercolationGraph(N={self.N}, depth={self.depth}, "
            f"edges={self.edge_count})"
        )

    @classmethod
    def from_edge_list(cls, N, depth, pairs, provenance=None):
        """Build a fixture graph from explicit (u, v) pairs; distances derived."""
        pairs = list(pairs)
        u = np.array([p[0] for p in pairs], dtype=np.int64)
        v = np.array([p[1] for p in pairs], dtype=np.int64)
        d = np.array([hdist_ids(int(a), int(b), N) for a, b in pairs], dtype=np.int64)
        return cls(N, depth, u, v, d, provenance)


_ENUMERATION_LIMIT = 1 << 22


def _enumerate_shell_pairs(N, depth, j):
    """All unordered distance-j pairs (u, v), u < v, of the depth ball.

    The distance-j digit is the most significant differing one, so u < v is
    equivalent to digit_j(u) < digit_j(v): enumerate every vertex u, every
    larger value of digit j, and every assignment of the partner's lower
    digits.  Each pair appears exactly once.
    """
    low = N ** (j - 1)
    u = np.arange(N**depth, dtype=np.int64)
    digit = (u // low) % N
    us, vs = [], []
    for step in range(1, N):
        sel = digit + step < N
        base = u[sel] + step * low - (u[sel] % low)
        for rep in range(low):
            us.append(u[sel])
            vs.append(base + rep)
    return np.concatenate(us), np.concatenate(vs)


def _place_shell_pairs(rng, N, depth, j, count):
    """`count` distinct uniform distance-j pairs (uniform count-subset law).

    Sparse shells: draw pairs i.i.d. (pick x uniformly, rebuild digits
    1..j-1 of the partner uniformly, shift digit j by a nonzero offset) and
    keep the first `count` distinct ones, the law of rejection sampling
    without replacement.  Dense shells, where rejection degenerates into a
    coupon-collector tail, enumerate the shell and take a uniform subset;
    both procedures give the uniform distribution over count-subsets.
    """
    n_vertices = N**depth
    block = N**j
    low = N ** (j - 1)
    m_j = shell_pair_count(N, depth, j)
    if m_j <= _ENUMERATION_LIMIT and count * 8 >= m_j * 7:
        all_u, all_v = _enumerate_shell_pairs(N, depth, j)
        take = rng.choice(m_j, size=count, replace=False)
        return all_u[take], all_v[take]
    out_u = np.empty(count, dtype=np.int64)
    out_v = np.empty(count, dtype=np.int64)
    seen = np.empty(0, dtype=np.int64)
    got = 0
    while got < count:
        want = count - got
        batch = max(2 * want, 64)
        x = rng.integers(0, n_vertices, size=batch, dtype=np.int64)
        rep_low = rng.integers(0, low, size=batch, dtype=np.int64)
        shift = rng.integers(1, N, size=batch, dtype=np.int64)
        digit = (x // low) % N
        y = x - (x % block) + ((digit + shift) % N) * low + rep_low
        u = np.minimum(x, y)
        v = np.maximum(x, y)
        key = u * n_vertices + v
        # first occurrence within the batch, in draw order
        _, first = np.unique(key, return_index=True)
        first.sort()
        key = key[first]
        fresh = ~np.isin(key, seen)
        key = key[fresh][:want]
        taken = key.shape[0]
        out_u[got : got + taken] = key // n_vertices
        out_v[got : got + taken] = key % n_vertices
        seen = np.concatenate([seen, key])
        got += taken
    return out_u, out_v


def sample_graph(cfg: SampleConfig) -> PercolationGraph:
    """Draw the percolation graph restricted to the depth-`cfg.depth` ball.

    Per distance class j: edge count ~ Binomial(shell_pair_count, p_j) from
    substream (seed, shell, j), then placement from the same substream.
    Deterministic given cfg.
    """
    cfg.check_budget()
    N, depth = cfg.N, cfg.depth
    expected = 0.0
    for j in range(1, depth + 1):
        expected += shell_pair_count(N, depth, j) * model.edge_prob(cfg.profile, j)
    if expected > DEFAULT_EDGE_BUDGET:
        raise CapacityError(
            f"expected {expected:.3g} edges exceed budget {DEFAULT_EDGE_BUDGET}"
        )
    parts_u, parts_v, parts_d = [], [], []
    for j in range(1, depth + 1):
        p_j = model.edge_prob(cfg.profile, j)
        m_j = shell_pair_count(N, depth, j)
        rng = generator(cfg.seed, STREAM_SHELL, j)
        count = exact_binomial(rng, m_j, p_j)
        if count == 0:
            continue
        u, v = _place_shell_pairs(rng, N, depth, j, count)
        parts_u.append(u)
        parts_v.append(v)
        parts_d.append(np.full(count, j, dtype=np.int64))
    if parts_u:
        eu = np.concatenate(parts_u)
        ev = np.concatenate(parts_v)
        ed = np.concatenate(parts_d)
    else:
        eu = ev = ed = np.empty(0, dtype=np.int64)
    return PercolationGraph(N, depth, eu, ev, ed, cfg)


def thin_graph(g: PercolationGraph, target: ConnectivityProfile, seed: int) -> PercolationGraph:
    """Monotone coupling: keep each distance-j edge with ratio p_target/p_source.

    Requires the target law to be dominated shell by shell; the result is an
    exact subgraph whose marginal law equals a fresh sample under `target`.
    """
    src = g.provenance.profile
    if target.N != src.N or target.delta != src.delta:
        raise CouplingOrderError("thinning requires equal N and delta")
    ratios = np.ones(g.depth + 1, dtype=np.float64)
    for j in range(1, g.depth + 1):
        p_s = model.edge_prob(src, j)
        p_t = model.edge_prob(target, j)
        if p_t > p_s + 1e-15:
            raise CouplingOrderError(
                f"target edge probability exceeds source at distance {j}"
            )
        ratios[j] = 0.0 if p_s == 0.0 else min(p_t / p_s, 1.0)
    keep = np.zeros(g.edge_count, dtype=bool)
    for j in range(1, g.depth + 1):
        sel = np.flatnonzero(g.edges_dist == j)
        if sel.size == 0:
            continue
        rng = generator(seed, STREAM_THIN, j)
        keep[sel] = rng.random(sel.size) < ratios[j]
    cfg = SampleConfig(g.N, g.depth, target, seed,
                       vertex_budget=g.provenance.vertex_budget
                       if isinstance(g.provenance, SampleConfig)
                       else DEFAULT_VERTEX_BUDGET)
    return PercolationGraph(g.N, g.depth, g.edges_u[keep], g.edges_v[keep],
                            g.edges_dist[keep], cfg)


def save_graph(g: PercolationGraph, path):
    """Write the line-oriented graph format (bit-exact round trip)."""
    p = g.provenance.profile
    header = (
        f"hpg1 N={g.N} k={g.depth} seed={g.provenance.seed} "
        f"delta={p.delta!r} C0={p.C0!r} C1={p.C1!r} C2={p.C2!r} alpha={p.alpha!r}"
    )
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for u, v, d in zip(g.edges_u, g.edges_v, g.edges_dist):
            fh.write(f"{u} {v} {d}\n")


def load_graph(path) -> PercolationGraph:
    """Read a graph file, validating structure and distance annotations."""
    with open(path, "r") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise GraphParseError("empty file", 1)
    head = lines[0].split()
    if not head or head[0] != "hpg1":
        raise GraphParseError("expected 'hpg1' header", 1)
    fields = {}
    for tok in head[1:]:
        if "=" not in tok:
            raise GraphParseError(f"bad header token {tok!r}", 1)
        key, val = tok.split("=", 1)
        fields[key] = val
    try:
        N = int(fields["N"])
        depth = int(fields["k"])
        seed = int(fields["seed"])
        profile = ConnectivityProfile(
            N=N,
            delta=float(fields["delta"]),
            C0=float(fields["C0"]),
            C1=float(fields["C1"]),
            C2=float(fields["C2"]),
            alpha=float(fields["alpha"]),
        )
    except (KeyError, ValueError, InvalidInputError) as exc:
        raise GraphParseError(f"bad header: {exc}", 1) from None
    n = N**depth
    us, vs, ds = [], [], []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise GraphParseError("expected '<u> <v> <dist>'", ln)
        try:
            u, v, d = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise GraphParseError("non-integer edge field", ln) from None
        if not 0 <= u < v < n:
            raise GraphParseError(f"endpoints ({u}, {v}) out of order or range", ln)
        if hdist_ids(u, v, N) != d:
            raise GraphParseError(
                f"distance annotation {d} inconsistent with endpoints ({u}, {v})", ln
            )
        us.append(u)
        vs.append(v)
        ds.append(d)
    cfg = SampleConfig(N, depth, profile, seed)
    try:
        return PercolationGraph(N, depth, us, vs, ds, cfg)
    except InvalidInputError as exc:
        raise GraphParseError(str(exc), len(lines)) from None
