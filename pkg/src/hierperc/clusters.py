"""Connected components, per-ball maximal clusters, cutsets and diameters.

Ball clusters follow the convention: components are computed from edges with
both endpoints inside the ball (paths may not leave it), the maximal cluster
is maximal by vertex count, and ties are broken uniformly from a substream
keyed by the ball id so results are reproducible and independent per ball.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels, model
from .errors import InvalidInputError
from .model import ConnectivityProfile, ScheduleProfile
from .sampler import PercolationGraph
from .space import BallSpec
from .streams import STREAM_CUTSET_LAW, STREAM_TIE, exact_binomial, generator

DIAMETER_EXACT_THRESHOLD = 4096
DEFAULT_JMIN = 2
CUTSET_SLACK = 2.0


@dataclass
class ClusterLabeling:
    """Component id per vertex plus component sizes (ids are 0..n_comp-1)."""

    labels: np.ndarray
    sizes: np.ndarray

    @property
    def n_components(self) -> int:
        return int(self.sizes.shape[0])

    def component_of(self, vertex: int) -> np.ndarray:
        return np.flatnonzero(self.labels == self.labels[vertex])


@dataclass
class BallClusterRecord:
    """Chosen maximal cluster of one ball and its density."""

    ball: BallSpec
    vertices: np.ndarray
    density: float
    tie_broken: bool


@dataclass
class CutsetEntry:
    j: int
    edges: np.ndarray  # (m, 2) vertex pairs
    size: int
    kappa_over_N: float
    truncated: bool


@dataclass
class CutsetReport:
    entries: list
    schedule: ScheduleProfile
    j_min: int

    def sizes(self) -> np.ndarray:
        return np.array([e.size for e in self.entries], dtype=np.int64)


def components(g: PercolationGraph) -> ClusterLabeling:
    """Connected components of the whole sampled graph."""
    labels = kernels.union_labels(g.n_vertices, g.edges_u, g.edges_v)
    sizes = np.bincount(labels)
    return ClusterLabeling(labels=labels, sizes=sizes)


def _ball_edge_mask(g: PercolationGraph, base: int, size: int) -> np.ndarray:
    return (g.edges_u >= base) & (g.edges_v < base + size)


def ball_cluster(g: PercolationGraph, ball: BallSpec, rng_seed: int) -> BallClusterRecord:
    """Maximal cluster of `ball` using intra-ball edges only.

    Among components of maximal vertex count one is chosen uniformly at
    random; the substream is keyed by the ball id so different balls are
    independent and the same ball is reproducible.
    """
    size = ball.size
    base = ball.base_id
    if base < 0 or base + size > g.n_vertices:
        raise InvalidInputError("ball outside the sampled graph")
    mask = _ball_edge_mask(g, base, size)
    lu = g.edges_u[mask] - base
    lv = g.edges_v[mask] - base
    labels = kernels.union_labels(size, lu, lv)
    sizes = np.bincount(labels)
    best = sizes.max()
    candidates = np.flatnonzero(sizes == best)
    tie = candidates.size > 1
    if tie:
        ball_index = base // size
        rng = generator(rng_seed, STREAM_TIE, ball_index)
        chosen = candidates[rng.integers(0, candidates.size)]
    else:
        chosen = candidates[0]
    verts = np.flatnonzero(labels == chosen) + base
    return BallClusterRecord(
        ball=ball,
        vertices=verts,
        density=float(best) / size,
        tie_broken=bool(tie),
    )


def density_population(g: PercolationGraph, level: int):
    """Densities of all disjoint level-balls of the sample (i.i.d. draws).

    Uses only edges of distance <= level, which are exactly the intra-ball
    edges of every level-ball at once; the density of a ball is the size of
    its largest component over N**level (tie identity does not affect it).
    Returns a float array of length N**(depth-level).
    """
    if not 0 <= level < g.depth:
        raise InvalidInputError("need 0 <= level < depth")
    n = g.n_vertices
    bsize = g.N**level
    n_balls = g.N ** (g.depth - level)
    sel = g.edges_dist <= level
    labels = kernels.union_labels(n, g.edges_u[sel], g.edges_v[sel])
    sizes = np.bincount(labels)
    first_vertex = np.full(sizes.shape[0], n, dtype=np.int64)
    np.minimum.at(first_vertex, labels, np.arange(n, dtype=np.int64))
    ball_of_comp = first_vertex // bsize
    best = np.zeros(n_balls, dtype=np.int64)
    np.maximum.at(best, ball_of_comp, sizes)
    return best.astype(np.float64) / bsize


def _annulus_bounds(sched: ScheduleProfile, j: int):
    """Vertex-norm bounds (lo, hi] of annulus I_j = (k_(2j), k_(2(j+1))]."""
    return model.schedule_k_n(sched, 2 * j), model.schedule_k_n(sched, 2 * (j + 1))


def cutsets(g: PercolationGraph, sched: ScheduleProfile, cluster: np.ndarray,
            j_range, alpha: float = None, j_min: int = DEFAULT_JMIN) -> CutsetReport:
    """Annulus cutsets of the cluster containing the origin.

    Entry j holds the edges with one endpoint in cluster-intersect-I_j and the
    other in I_(j+1); annuli are defined by vertex norm (distance from 0).
    The kappa_j / N reference uses the schedule's `a` and the sampling
    profile's alpha unless overridden.  Annuli truncated by the sampled depth
    are flagged.
    """
    if 0 not in cluster:
        raise InvalidInputError("cluster must contain the origin")
    prof = getattr(g.provenance, "profile", None)
    if alpha is None:
        if prof is None:
            raise InvalidInputError("alpha required when graph has no profile")
        alpha = prof.alpha
    in_cluster = np.zeros(g.n_vertices, dtype=bool)
    in_cluster[np.asarray(cluster, dtype=np.int64)] = True
    norms = g.distances_from(0)
    nu = norms[g.edges_u]
    nv = norms[g.edges_v]
    entries = []
    for j in j_range:
        lo_j, hi_j = _annulus_bounds(sched, j)
        lo_n, hi_n = _annulus_bounds(sched, j + 1)
        truncated = hi_n > g.depth
        u_in_j = (nu > lo_j) & (nu <= hi_j) & in_cluster[g.edges_u]
        v_in_next = (nv > lo_n) & (nv <= hi_n)
        v_in_j = (nv > lo_j) & (nv <= hi_j) & in_cluster[g.edges_v]
        u_in_next = (nu > lo_n) & (nu <= hi_n)
        sel = (u_in_j & v_in_next) | (v_in_j & u_in_next)
        edges = np.column_stack([g.edges_u[sel], g.edges_v[sel]])
        entries.append(
            CutsetEntry(
                j=int(j),
                edges=edges,
                size=int(edges.shape[0]),
                kappa_over_N=model.kappa_j(sched.a, alpha, int(j)) / g.N
                if j >= 1
                else 0.0,
                truncated=bool(truncated),
            )
        )
    return CutsetReport(entries=entries, schedule=sched, j_min=j_min)


def verify_cutset_disconnection(g: PercolationGraph, sched: ScheduleProfile,
                                cluster: np.ndarray, entry: CutsetEntry) -> bool:
    """Check that removing entry's edges separates the cluster across I_j.

    Recomputes components without the cutset edges and verifies no component
    contains both a cluster vertex with norm <= k_(2j) and one with norm
    beyond k_(2(j+1)).
    """
    lo_j, _ = _annulus_bounds(sched, entry.j)
    _, hi_n = _annulus_bounds(sched, entry.j + 1)
    if entry.size:
        n = g.n_vertices
        cut_keys = entry.edges[:, 0] * n + entry.edges[:, 1]
        keep = ~np.isin(g.edges_u * n + g.edges_v, cut_keys)
    else:
        keep = np.ones(g.edge_count, dtype=bool)
    labels = kernels.union_labels(g.n_vertices, g.edges_u[keep], g.edges_v[keep])
    norms = g.distances_from(0)
    in_cluster = np.zeros(g.n_vertices, dtype=bool)
    in_cluster[np.asarray(cluster, dtype=np.int64)] = True
    inner = in_cluster & (norms <= lo_j)
    outer = in_cluster & (norms > hi_n)
    if not inner.any() or not outer.any():
        return True
    return not np.isin(np.unique(labels[inner]), np.unique(labels[outer])).any()


def simulate_cutset_sizes(profile: ConnectivityProfile, sched: ScheduleProfile,
                          j_range, seed: int, replicas: int) -> np.ndarray:
    """Sample annulus-crossing edge counts from their exact law, graph-free.

    Every pair (u in I_j, v in I_(j+1)) sits at distance norm(v), so the
    count of edges between the annuli is a sum over distance classes l of
    independent Binomial(|I_j| * (N^l - N^(l-1)), p_l) draws.  This is the
    distribution of the unrestricted cutset size in the full (untruncated)
    graph, an upper coupling of the cluster-restricted cutset; it reaches
    annuli whose balls are far beyond any materialisable vertex budget.
    Returns an int64 array of shape (replicas, len(j_range)).
    """
    j_list = list(j_range)
    out = np.zeros((replicas, len(j_list)), dtype=np.int64)
    N = profile.N
    for r in range(replicas):
        rng = generator(seed, STREAM_CUTSET_LAW, r)
        for col, j in enumerate(j_list):
            lo_j, hi_j = _annulus_bounds(sched, j)
            lo_n, hi_n = _annulus_bounds(sched, j + 1)
            size_ij = N**hi_j - N**lo_j
            total = 0
            for ell in range(lo_n + 1, hi_n + 1):
                pairs = size_ij * (N**ell - N ** (ell - 1))
                p = model.edge_prob(profile, ell)
                total += exact_binomial(rng, pairs, p)
            out[r, col] = total
    return out


def expected_cutset_size(profile: ConnectivityProfile, sched: ScheduleProfile, j: int) -> float:
    """Exact mean of the unrestricted annulus-crossing edge count."""
    N = profile.N
    lo_j, hi_j = _annulus_bounds(sched, j)
    lo_n, hi_n = _annulus_bounds(sched, j + 1)
    size_ij = N**hi_j - N**lo_j
    mean = 0.0
    for ell in range(lo_n + 1, hi_n + 1):
        pairs = size_ij * (N**ell - N ** (ell - 1))
        mean += pairs * model.edge_prob(profile, ell)
    return mean


def detect_skipping(g: PercolationGraph, sched: ScheduleProfile, n_max: int = None):
    """Edges that skip at least two annuli of the schedule.

    Annulus n holds the vertices with norm in (k_(n-1), k_n]; an edge between
    annuli n and n + m + 1 with m >= 2 is a violation reported as
    (u, v, n, m).  The origin (norm 0) belongs to no annulus and its edges
    are never violations.
    """
    if n_max is None:
        n_max = 2
        while model.schedule_k_n(sched, n_max) < g.depth:
            n_max += 1
    ktable = np.array(
        [model.schedule_k_n(sched, n) for n in range(1, n_max + 1)], dtype=np.int64
    )
    norms = g.distances_from(0)
    # annulus index (1-based); norm 0 maps to index 0 (no annulus)
    ann = np.searchsorted(ktable, norms, side="left") + 1
    ann[norms == 0] = 0
    au = ann[g.edges_u]
    av = ann[g.edges_v]
    gap = np.abs(au - av)
    sel = (gap >= 3) & (au > 0) & (av > 0)
    out = []
    for idx in np.flatnonzero(sel):
        n_low = int(min(au[idx], av[idx]))
        out.append(
            (int(g.edges_u[idx]), int(g.edges_v[idx]), n_low, int(gap[idx]) - 1)
        )
    return out


@dataclass
class DiameterEstimate:
    value: int
    method: str  # "exact-bfs" or "double-sweep"


def _bfs_farthest(indptr, indices, local_of, vertices, start_local):
    """BFS over the induced subgraph; returns (distances, farthest vertex)."""
    m = len(vertices)
    dist = np.full(m, -1, dtype=np.int64)
    dist[start_local] = 0
    frontier = [start_local]
    d = 0
    far = start_local
    while frontier:
        d += 1
        nxt = []
        for x in frontier:
            gx = vertices[x]
            for gy in indices[indptr[gx] : indptr[gx + 1]]:
                y = local_of.get(int(gy))
                if y is not None and dist[y] < 0:
                    dist[y] = d
                    far = y
                    nxt.append(y)
        frontier = nxt
    return dist, far


def cluster_diameter(g: PercolationGraph, vertices,
                     exact_threshold: int = DIAMETER_EXACT_THRESHOLD) -> DiameterEstimate:
    """Graph diameter of the induced subgraph on `vertices`.

    Exact all-sources BFS up to `exact_threshold` vertices; beyond that a
    double sweep (BFS to the farthest vertex, then BFS from it) gives a
    2-approximation from below, tagged in the result.
    """
    verts = np.asarray(sorted(int(v) for v in vertices), dtype=np.int64)
    if verts.size == 0:
        raise InvalidInputError("empty vertex set")
    indptr, indices = g.adjacency()
    local_of = {int(v): i for i, v in enumerate(verts)}
    dist0, far = _bfs_farthest(indptr, indices, local_of, verts, 0)
    if (dist0 < 0).any():
        raise InvalidInputError("vertex set is not connected in the graph")
    if verts.size <= exact_threshold:
        best = int(dist0.max())
        for s in range(1, verts.size):
            dist, _ = _bfs_farthest(indptr, indices, local_of, verts, s)
            best = max(best, int(dist.max()))
        return DiameterEstimate(value=best, method="exact-bfs")
    dist1, _ = _bfs_farthest(indptr, indices, local_of, verts, far)
    return DiameterEstimate(value=int(dist1.max()), method="double-sweep")


def density_rows(g: PercolationGraph, levels):
    """Rows (level, ball_id, density) for CSV emission."""
    rows = []
    for level in levels:
        dens = density_population(g, level)
        for ball_id, d in enumerate(dens):
            rows.append((int(level), int(ball_id), float(d)))
    return rows


def cutset_rows(report: CutsetReport):
    """Rows (j, size, kappa_over_N) for CSV emission."""
    return [(e.j, e.size, e.kappa_over_N) for e in report.entries]
