"""Closed-form connection laws and analysis bounds.

Houses the distance-dependent coupling law c_k, edge probabilities, the
ball-to-ball connection probability in the critical regime, the classic
recursion for the probability that a G(n, 1-q) random graph is connected,
the q-style tail bounds, the annulus schedule, cutset weights and the
path-length product bound.

All logarithms are natural.  `LOG_BASE` is recorded as a module constant so
the convention can be swapped in one place if ever needed.
"""

import math
from dataclasses import dataclass

from .errors import InvalidInputError, UnsupportedProfileError

LOG_BASE = math.e


def _log(x: float) -> float:
    return math.log(x) if LOG_BASE == math.e else math.log(x, LOG_BASE)


# Named defaults used by the diagnostic reports (analysis constants, not
# sampling parameters).
DEFAULT_EPS = 0.05
DEFAULT_S = 0.775
DEFAULT_MEAN_FLOOR = 2.0 / 3.0
DEFAULT_INITIAL_MASS = 0.75
DEFAULT_PRODUCT_FLOOR = 0.9


@dataclass(frozen=True)
class ConnectivityProfile:
    """Parameters (N, delta, C0, C1, C2, alpha) of the coupling law c_k."""

    N: int
    delta: float
    C0: float = 0.0
    C1: float = 0.0
    C2: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.N < 2:
            raise InvalidInputError(f"N must be >= 2, got {self.N}")
        if self.delta <= 0:
            raise InvalidInputError("delta must be > 0")
        if self.C0 < 0 or self.C1 < 0 or self.C2 < 0:
            raise InvalidInputError("C0, C1, C2 must be >= 0")
        if self.C0 == 0 and self.C1 == 0 and self.C2 == 0:
            raise InvalidInputError("at least one of C0, C1, C2 must be positive")
        if self.alpha <= 0:
            raise InvalidInputError("alpha must be > 0")

    @property
    def critical(self) -> bool:
        return self.delta == 1.0

    def replace_alpha(self, alpha: float) -> "ConnectivityProfile":
        return ConnectivityProfile(self.N, self.delta, self.C0, self.C1, self.C2, alpha)


@dataclass(frozen=True)
class ScheduleProfile:
    """Annulus schedule k_n = floor(K n ln n) with coupling C + a ln n * n^(b ln N)."""

    K: float = 1.0
    C: float = 0.0
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.K <= 0 or self.a <= 0 or self.b <= 0:
            raise InvalidInputError("K, a, b must be > 0")
        if self.C < 0:
            raise InvalidInputError("C must be >= 0")

    def regime_ok(self, N: int) -> bool:
        """True when 2/ln N < K < b (flagged, never enforced)."""
        return 2.0 / _log(N) < self.K < self.b


@dataclass(frozen=True)
class AnalysisParams:
    """Diagnostic thresholds eps, beta, gamma, s, each in (0, 1)."""

    eps: float = DEFAULT_EPS
    beta: float = 0.5
    gamma: float = 0.9
    s: float = DEFAULT_S

    def __post_init__(self):
        for name in ("eps", "beta", "gamma", "s"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise InvalidInputError(f"{name} must be in (0, 1), got {v}")

    def validate_for(self, delta: float):
        """Relational checks that need the profile's delta."""
        if delta < 1.0 and not (1.0 + delta) / 2.0 < self.gamma < 1.0:
            raise InvalidInputError(
                f"gamma must lie in ((1+delta)/2, 1) for delta={delta}"
            )
        if self.s + self.eps / (2.0 * (1.0 - self.s)) > 1.0:
            raise InvalidInputError("need s + eps/(2(1-s)) <= 1")


def c_k(profile: ConnectivityProfile, k: int) -> float:
    """Coupling constant C0 + C1*ln(k) + C2*k**alpha at distance k >= 1."""
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k}")
    return profile.C0 + profile.C1 * _log(k) + profile.C2 * float(k) ** profile.alpha


def edge_prob(profile: ConnectivityProfile, k: int) -> float:
    """Edge probability min(c_k / N**((1+delta) k), 1) between distance-k points."""
    ck = c_k(profile, k)
    denom = float(profile.N) ** ((1.0 + profile.delta) * k)
    return min(ck / denom, 1.0)


def pair_connect_prob(x1: float, x2: float, k: int, profile: ConnectivityProfile) -> float:
    """Probability that two sub-balls with densities x1, x2 are directly linked.

    Two disjoint (k-1)-balls inside a k-ball hold N**(k-1)*x1 and N**(k-1)*x2
    cluster points; every cross pair is an independent candidate edge with the
    distance-k probability, so the clusters connect with probability
    1 - (1 - p_k)**(N**(2(k-1)) x1 x2).  Evaluated via expm1/log1p so it
    survives p_k down to ~1e-300.  Critical-regime profiles only.
    """
    if not (profile.critical and profile.C2 > 0):
        raise UnsupportedProfileError(
            "pair connection law is defined for delta == 1 with C2 > 0"
        )
    if not (0.0 <= x1 <= 1.0 and 0.0 <= x2 <= 1.0):
        raise InvalidInputError("densities must lie in [0, 1]")
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k}")
    base = edge_prob(profile, k)
    scale = float(profile.N) ** (2 * (k - 1))
    if base >= 1.0:
        return 1.0 if x1 * x2 > 0 else 0.0
    t = (scale * x1) * x2
    return -math.expm1(t * math.log1p(-base))


def er_connected_prob(n: int, q: float) -> float:
    """P(G(n, 1-q) is connected), by the standard counting recursion.

    P(n) = 1 - sum_{k=1}^{n-1} C(n-1, k-1) P(k) q^(k(n-k)); the k-th term
    isolates the component containing vertex 1 at size k.
    """
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if not 0.0 <= q <= 1.0:
        raise InvalidInputError("q must be in [0, 1]")
    P = [0.0] * (n + 1)
    P[1] = 1.0
    for m in range(2, n + 1):
        s = 0.0
        for k in range(1, m):
            s += math.comb(m - 1, k - 1) * P[k] * q ** (k * (m - k))
        P[m] = 1.0 - s
    return P[n]


def er_coefficient(N: int) -> int:
    """Coefficient bound on the q**(N-1) tail of 1 - er_connected_prob.

    The two dominant terms of the recursion at q -> 0 (component sizes 1 and
    N-1) carry coefficients C(N-1, 0) and C(N-1, N-2); their sum times a
    safety factor 2.  Diagnostics only, never used for sampling.
    """
    return 2 * (math.comb(N - 1, 0) + math.comb(N - 1, N - 2))


def q_bounds(params: AnalysisParams, profile: ConnectivityProfile, k: int):
    """Pair (q_k, q_k^N): per-pair and all-N non-connection tail bounds.

    q_k = exp(-C2 eps^2 k^alpha / N^2) bounds the probability that two
    eps-dense sub-balls fail to link; q_k^N = er_coefficient(N) * q_k**(N-1)
    bounds the probability that the N sub-balls fail to form one component.
    """
    if not profile.critical:
        raise UnsupportedProfileError("q bounds are defined for delta == 1")
    qk = math.exp(
        -profile.C2 * params.eps**2 * float(k) ** profile.alpha / profile.N**2
    )
    return qk, er_coefficient(profile.N) * qk ** (profile.N - 1)


def schedule_k_n(sched: ScheduleProfile, n: int) -> int:
    """Annulus boundary k_n = floor(K * n * ln n)."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    return math.floor(sched.K * n * _log(n))


def schedule_gap(sched: ScheduleProfile, n: int) -> int:
    """Diagnostic gap k_(n+1) - k_n (grows like K ln n)."""
    return schedule_k_n(sched, n + 1) - schedule_k_n(sched, n)


def schedule_c(sched: ScheduleProfile, N: int, n: int) -> float:
    """Scheduled coupling C + a * ln(n) * n**(b ln N) at index n >= 1."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    return sched.C + sched.a * _log(n) * float(n) ** (sched.b * _log(N))


def kappa_j(a: float, alpha: float, j: int) -> float:
    """Cutset weight a * 2**alpha * ln(j) * j**alpha."""
    if j < 1:
        raise InvalidInputError(f"j must be >= 1, got {j}")
    if a <= 0 or alpha <= 0:
        raise InvalidInputError("a and alpha must be > 0")
    return a * 2.0**alpha * _log(j) * float(j) ** alpha


def second_moment_lower_bound(mean: float, a: float) -> float:
    """Lower bound (mean - a/2) / (1 - a/2) for P(X >= a/2), X in [0, 1].

    Valid for any [0,1]-valued X with the given mean; may be negative, in
    which case it is vacuous.
    """
    if not 0.0 <= mean <= 1.0:
        raise InvalidInputError("mean must be in [0, 1]")
    if not 0.0 < a < 1.0:
        raise InvalidInputError("a must be in (0, 1)")
    return (mean - a / 2.0) / (1.0 - a / 2.0)


def origin_cluster_bound(a: float) -> float:
    """Implied lower bound a^2 / (2 (2 - a)) for the origin lying in the cluster."""
    if not 0.0 < a < 1.0:
        raise InvalidInputError("a must be in (0, 1)")
    return a * a / (2.0 * (2.0 - a))


def path_length_bound(diameters) -> float:
    """Path-length bound prod(D_i + 1) - 1 over a run of per-stage diameters.

    Satisfies L(m+1) = L(m) * (D(m+1) + 1) + D(m+1): entering and leaving each
    of the D+1 clusters on a stage costs at most a within-cluster path plus
    the linking edge.
    """
    ds = list(diameters)
    if not ds:
        raise InvalidInputError("need at least one diameter")
    if any(d < 0 for d in ds):
        raise InvalidInputError("diameters must be >= 0")
    prod = 1.0
    for d in ds:
        prod *= d + 1.0
    return prod - 1.0
