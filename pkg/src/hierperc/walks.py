"""Simple nearest-neighbour random walks on a percolation cluster.

Each replica runs on its own derived substream and consumes one uniform word
per step, so replica sets are reproducible and order-independent.  Replicas
that exhaust the step budget are reported as censored, never folded into the
escape estimate (conditioning on absorption would bias it).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .electrical import ResistanceEstimate
from .errors import InvalidInputError
from .sampler import PercolationGraph
from .streams import STREAM_WALK, substream

OUTCOME_ESCAPE = 0
OUTCOME_RETURN = 1
OUTCOME_EXHAUSTED = 2
OUTCOME_NAMES = {OUTCOME_ESCAPE: "escape", OUTCOME_RETURN: "return",
                 OUTCOME_EXHAUSTED: "exhausted"}


@dataclass(frozen=True)
class WalkConfig:
    start: int = 0
    max_steps: int = 10000
    replicas: int = 1000
    seed: int = 0


def _cluster_of(g: PercolationGraph, start: int):
    labels = kernels.union_labels(g.n_vertices, g.edges_u, g.edges_v)
    return np.flatnonzero(labels == labels[start])


def _run(g: PercolationGraph, cfg: WalkConfig, absorb: np.ndarray,
         stop_on_return: bool):
    indptr, indices = g.adjacency()
    if indptr[cfg.start + 1] - indptr[cfg.start] == 0:
        raise InvalidInputError("start vertex has degree 0")
    key = substream(cfg.seed, STREAM_WALK)
    return kernels.simulate_walks(indptr, indices, cfg.start, absorb,
                                  cfg.max_steps, cfg.replicas, key,
                                  stop_on_return)


@dataclass
class EscapeEstimate:
    estimate: float
    std_error: float
    escapes: int
    returns: int
    censored: int


def escape_probability(g: PercolationGraph, cfg: WalkConfig, shell: int) -> EscapeEstimate:
    """MC estimate of P(reach beyond-shell vertices before returning to start).

    Absorbing set: cluster vertices at hierarchical distance > shell from the
    start.  Walks stop on absorption or on first return; step-budget
    exhaustion is counted separately as censored.
    """
    cluster = _cluster_of(g, cfg.start)
    norms = g.distances_from(cfg.start)
    sinks = cluster[norms[cluster] > shell]
    if sinks.size == 0:
        raise InvalidInputError(f"cluster does not reach beyond shell {shell}")
    absorb = np.zeros(g.n_vertices, dtype=bool)
    absorb[sinks] = True
    outcomes, _, _, _ = _run(g, cfg, absorb, stop_on_return=True)
    escapes = int((outcomes == OUTCOME_ESCAPE).sum())
    returns = int((outcomes == OUTCOME_RETURN).sum())
    censored = int((outcomes == OUTCOME_EXHAUSTED).sum())
    decided = escapes + returns
    if decided == 0:
        raise InvalidInputError("all replicas censored; raise max_steps")
    p = escapes / decided
    se = math.sqrt(max(p * (1.0 - p), 1.0 / decided) / decided)
    return EscapeEstimate(estimate=p, std_error=se, escapes=escapes,
                          returns=returns, censored=censored)


@dataclass
class ReturnStatistics:
    returns: np.ndarray       # per replica
    outcomes: np.ndarray      # per replica codes
    steps: np.ndarray
    deepest_shell: int

    @property
    def mean_returns(self) -> float:
        return float(self.returns.mean())

    @property
    def median_returns(self) -> float:
        return float(np.median(self.returns))

    def outcome_counts(self):
        return {
            name: int((self.outcomes == code).sum())
            for code, name in OUTCOME_NAMES.items()
        }


def return_statistics(g: PercolationGraph, cfg: WalkConfig) -> ReturnStatistics:
    """Returns to start before reaching the cluster's outermost shell.

    The absorbing set is the cluster vertices at the maximal hierarchical
    distance from the start; replicas run until absorption or the step
    budget, counting every revisit of the start.
    """
    cluster = _cluster_of(g, cfg.start)
    if cluster.size < 2:
        raise InvalidInputError("start cluster is trivial")
    norms = g.distances_from(cfg.start)
    deepest = int(norms[cluster].max())
    absorb = np.zeros(g.n_vertices, dtype=bool)
    absorb[cluster[norms[cluster] == deepest]] = True
    outcomes, steps, returns, _ = _run(g, cfg, absorb, stop_on_return=False)
    return ReturnStatistics(returns=returns, outcomes=outcomes, steps=steps,
                            deepest_shell=deepest)


def first_step_distribution(g: PercolationGraph, start: int, replicas: int,
                            seed: int) -> np.ndarray:
    """Empirical counts of the first step's destination (uniformity check)."""
    cfg = WalkConfig(start=start, max_steps=1, replicas=replicas, seed=seed)
    absorb = np.zeros(g.n_vertices, dtype=bool)
    _, _, _, finals = _run(g, cfg, absorb, stop_on_return=False)
    return np.bincount(finals, minlength=g.n_vertices)


def mc_resistance(g: PercolationGraph, cfg: WalkConfig, shell: int) -> ResistanceEstimate:
    """Cross-check resistance 1/(degree(start) * escape probability).

    Monte Carlo only; never the primary estimator.  The reported residual is
    the propagated standard error of the estimate.
    """
    esc = escape_probability(g, cfg, shell)
    deg = int(g.degrees()[cfg.start])
    if esc.estimate <= 0.0:
        raise InvalidInputError("no escapes observed; cannot invert")
    value = 1.0 / (deg * esc.estimate)
    se = esc.std_error / (deg * esc.estimate**2)
    return ResistanceEstimate(value=value, method="monte-carlo", residual=se)


def walk_rows(stats: ReturnStatistics):
    """Rows (replica, outcome, steps, returns) for CSV emission."""
    return [
        (int(i), OUTCOME_NAMES[int(o)], int(s), int(r))
        for i, (o, s, r) in enumerate(
            zip(stats.outcomes, stats.steps, stats.returns)
        )
    ]
