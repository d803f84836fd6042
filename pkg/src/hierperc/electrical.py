"""Effective resistance on unit-resistor cluster subgraphs.

The sink set is collapsed by grounding (potential 0 on every sink vertex),
avoiding explicit super-node surgery.  Injecting unit current at the source
and solving the grounded Laplacian gives the source potential, which equals
the effective resistance.  A Jacobi-preconditioned conjugate gradient on the
sparse operator is the workhorse; a dense direct solve doubles as the oracle
for small problems, and the walk-based estimate lives in `walks` as a
cross-check only.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from . import kernels
from .errors import (InconsistentCutsetError, InvalidInputError,
                     NumericalFailureError)
from .sampler import PercolationGraph

DENSE_LIMIT = 512
DEFAULT_TOL = 1e-8
ITER_CAP_FACTOR = 20.0


class ResistanceProblem:
    """Source vertex against a grounded sink set inside one component."""

    def __init__(self, n_vertices, edges_u, edges_v, source, sinks):
        u = np.asarray(edges_u, dtype=np.int64)
        v = np.asarray(edges_v, dtype=np.int64)
        sinks = np.unique(np.asarray(sinks, dtype=np.int64).ravel())
        source = int(source)
        if sinks.size == 0:
            raise InvalidInputError("sink set must be nonempty")
        if (sinks == source).any():
            raise InvalidInputError("source must not be a sink")
        labels = kernels.union_labels(n_vertices, u, v)
        comp = labels == labels[source]
        if not comp[sinks].any():
            raise InvalidInputError("source and sink set are not connected")
        # restrict to the source's component
        keep_edges = comp[u]  # both endpoints share the component
        self.n_vertices = int(n_vertices)
        self.source = source
        self.sinks = sinks[comp[sinks]]
        self.component = np.flatnonzero(comp)
        self.edges_u = u[keep_edges]
        self.edges_v = v[keep_edges]
        self._build()

    @classmethod
    def from_graph(cls, g: PercolationGraph, source, sinks):
        return cls(g.n_vertices, g.edges_u, g.edges_v, source, sinks)

    @classmethod
    def from_edges(cls, n_vertices, pairs, source, sinks):
        pairs = list(pairs)
        u = np.array([p[0] for p in pairs], dtype=np.int64)
        v = np.array([p[1] for p in pairs], dtype=np.int64)
        return cls(n_vertices, u, v, source, sinks)

    def _build(self):
        grounded = np.zeros(self.n_vertices, dtype=bool)
        grounded[self.sinks] = True
        in_comp = np.zeros(self.n_vertices, dtype=bool)
        in_comp[self.component] = True
        free = in_comp & ~grounded
        self.free_vertices = np.flatnonzero(free)
        local = np.full(self.n_vertices, -1, dtype=np.int64)
        local[self.free_vertices] = np.arange(self.free_vertices.size)
        deg = np.bincount(self.edges_u, minlength=self.n_vertices) + np.bincount(
            self.edges_v, minlength=self.n_vertices
        )
        m = self.free_vertices.size
        both = free[self.edges_u] & free[self.edges_v]
        lu = local[self.edges_u[both]]
        lv = local[self.edges_v[both]]
        rows = np.concatenate([np.arange(m), lu, lv])
        cols = np.concatenate([np.arange(m), lv, lu])
        vals = np.concatenate(
            [deg[self.free_vertices].astype(np.float64),
             -np.ones(lu.size), -np.ones(lu.size)]
        )
        self.operator = sparse.csr_matrix((vals, (rows, cols)), shape=(m, m))
        self.local_source = int(local[self.source])
        self._local = local

    @property
    def size(self) -> int:
        """Vertex count of the component (sets the iteration cap)."""
        return int(self.component.size)


@dataclass
class ResistanceEstimate:
    """Effective resistance value with solve metadata."""

    value: float
    method: str                # "exact-dense" | "iterative" | "monte-carlo"
    residual: float            # relative residual (solvers) or std error (MC)
    iterations: int = 0
    potentials: np.ndarray = field(default=None, repr=False)


def _pcg(A, b, tol, maxiter, x0=None):
    """Jacobi-preconditioned conjugate gradient; returns (x, relres, iters)."""
    diag = A.diagonal()
    minv = 1.0 / diag
    x = np.zeros_like(b) if x0 is None else x0.astype(np.float64).copy()
    r = b - A @ x
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return x, 0.0, 0
    z = minv * r
    p = z.copy()
    rz = float(r @ z)
    it = 0
    relres = float(np.linalg.norm(r)) / bnorm
    while relres > tol and it < maxiter:
        Ap = A @ p
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        z = minv * r
        rz_new = float(r @ z)
        beta = rz_new / rz
        p = z + beta * p
        rz = rz_new
        it += 1
        relres = float(np.linalg.norm(r)) / bnorm
    return x, relres, it


def effective_resistance(problem: ResistanceProblem, tol: float = DEFAULT_TOL,
                         method: str = "iterative",
                         x0: np.ndarray = None) -> ResistanceEstimate:
    """Solve for the source potential under unit injected current.

    `method` is "iterative" (preconditioned CG, residual <= tol enforced) or
    "dense" (direct solve, available as the oracle up to 512 unknowns).
    """
    m = problem.operator.shape[0]
    b = np.zeros(m)
    b[problem.local_source] = 1.0
    if method == "dense":
        if m > DENSE_LIMIT:
            raise InvalidInputError(
                f"dense solve limited to {DENSE_LIMIT} unknowns, got {m}"
            )
        x = np.linalg.solve(problem.operator.toarray(), b)
        relres = float(np.linalg.norm(b - problem.operator @ x))
        iters = 0
        tag = "exact-dense"
    elif method == "iterative":
        cap = max(int(math.ceil(ITER_CAP_FACTOR * math.sqrt(problem.size))), 16)
        x, relres, iters = _pcg(problem.operator, b, tol, cap, x0=x0)
        if relres > tol:
            raise NumericalFailureError(
                f"CG did not reach tol {tol} in {cap} iterations", residual=relres
            )
        tag = "iterative"
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    potentials = np.zeros(problem.n_vertices)
    potentials[problem.free_vertices] = x
    return ResistanceEstimate(
        value=float(x[problem.local_source]),
        method=tag,
        residual=relres,
        iterations=iters,
        potentials=potentials,
    )


def flow_energy(problem: ResistanceProblem, estimate: ResistanceEstimate = None,
                tol: float = DEFAULT_TOL) -> float:
    """Energy of the harmonic unit current flow (equals the resistance).

    The current on an edge is the potential difference (unit resistors), so
    the energy is the sum of squared differences over the component's edges;
    grounded vertices sit at potential 0.
    """
    if estimate is None:
        estimate = effective_resistance(problem, tol=tol)
    phi = estimate.potentials
    diff = phi[problem.edges_u] - phi[problem.edges_v]
    return float(diff @ diff)


def flow_divergence(problem: ResistanceProblem, estimate: ResistanceEstimate) -> np.ndarray:
    """Net outflow per vertex of the harmonic flow (source should be 1, rest 0).

    Sinks are reported as one aggregate entry at index `problem.sinks[0]`
    position in the returned dense vector; non-component vertices carry 0.
    """
    phi = estimate.potentials
    div = np.zeros(problem.n_vertices)
    diff = phi[problem.edges_u] - phi[problem.edges_v]
    np.add.at(div, problem.edges_u, diff)
    np.add.at(div, problem.edges_v, -diff)
    return div


@dataclass
class ShellResistance:
    k: int
    estimate: ResistanceEstimate


def resistance_profile(g: PercolationGraph, shells, tol: float = DEFAULT_TOL,
                       method: str = "iterative", source: int = 0):
    """Resistance from the source to beyond-shell-k cluster vertices, per k.

    For each k the sink set is every cluster vertex at hierarchical distance
    greater than k from the source.  Shells the cluster does not reach are
    skipped (reported in the second return value).  Values are checked to be
    nondecreasing in k up to solver tolerance.
    """
    labels = kernels.union_labels(g.n_vertices, g.edges_u, g.edges_v)
    cluster = np.flatnonzero(labels == labels[source])
    if cluster.size < 2:
        raise InvalidInputError("source cluster is trivial")
    norms = g.distances_from(source)
    results = []
    skipped = []
    prev_phi = None
    prev_value = -np.inf
    for k in sorted(int(k) for k in shells):
        sinks = cluster[norms[cluster] > k]
        if sinks.size == 0:
            skipped.append(k)
            continue
        problem = ResistanceProblem.from_graph(g, source, sinks)
        x0 = None
        if prev_phi is not None and method == "iterative":
            x0 = prev_phi[problem.free_vertices]
        est = effective_resistance(problem, tol=tol, method=method, x0=x0)
        if est.value < prev_value - 10.0 * tol * max(1.0, abs(prev_value)):
            raise NumericalFailureError(
                f"resistance decreased from {prev_value} to {est.value} at k={k}",
                residual=est.residual,
            )
        prev_value = max(prev_value, est.value)
        prev_phi = est.potentials
        results.append(ShellResistance(k=k, estimate=est))
    return results, skipped


def nash_williams_bound(report) -> float:
    """Lower bound sum(1/|cutset_j|) from pairwise disjoint unit-resistor cutsets.

    Zero-size cutsets are only tolerated as a trailing run (the sampled graph
    simply ends there); a hole before a populated deeper cutset is an
    inconsistency and raises.
    """
    sizes = [int(s) for s in report.sizes()] if hasattr(report, "sizes") else [
        int(s) for s in report
    ]
    last_pos = -1
    for i, s in enumerate(sizes):
        if s > 0:
            last_pos = i
    for i, s in enumerate(sizes):
        if s == 0 and i < last_pos:
            raise InconsistentCutsetError(
                f"cutset {i} empty while deeper cutsets are populated"
            )
    return float(sum(1.0 / s for s in sizes if s > 0))


def nash_williams_partial_sums(sizes) -> np.ndarray:
    """Running partial sums of 1/size (0-size entries contribute nothing)."""
    out = []
    acc = 0.0
    for s in sizes:
        if s > 0:
            acc += 1.0 / float(s)
        out.append(acc)
    return np.array(out)


def resistance_rows(results):
    """Rows (k, resistance, method, residual) for CSV emission."""
    return [
        (r.k, r.estimate.value, r.estimate.method, r.estimate.residual)
        for r in results
    ]


def nash_williams_rows(j_values, sizes):
    """Rows (j, cutset_size, partial_nw_sum) for CSV emission."""
    partial = nash_williams_partial_sums(sizes)
    return [
        (int(j), int(s), float(p)) for j, s, p in zip(j_values, sizes, partial)
    ]
