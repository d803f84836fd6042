"""Exact arithmetic of the truncated hierarchical (ultrametric) address space.

Addresses are points of the radius-`level` ball around the origin in the
order-N hierarchical lattice.  An address is stored as a single integer id in
[0, N**level); digit i of its base-N expansion (least significant digit is
coordinate 1) is the i-th coordinate.  The hierarchical distance between two
addresses is the position of their most significant differing digit, which
makes every ball of diameter k an aligned block of N**k consecutive ids.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, InvalidInputError

DEFAULT_VERTEX_BUDGET = 1 << 24


@dataclass(frozen=True)
class HAddress:
    """A point of the truncated lattice: base-N digits of `id`, `level` of them."""

    id: int
    level: int
    N: int

    def __post_init__(self):
        if self.N < 2:
            raise InvalidInputError(f"N must be >= 2, got {self.N}")
        if self.level < 0:
            raise InvalidInputError(f"level must be >= 0, got {self.level}")
        if not 0 <= self.id < self.N**self.level:
            raise InvalidInputError(
                f"id {self.id} outside [0, {self.N}**{self.level})"
            )

    def digits(self):
        """Base-N digits, least significant first (coordinate 1 first)."""
        out = []
        x = self.id
        for _ in range(self.level):
            out.append(x % self.N)
            x //= self.N
        return out


@dataclass(frozen=True)
class BallSpec:
    """Ball of diameter `diameter` around `center`; contains N**diameter points."""

    center: HAddress
    diameter: int

    def __post_init__(self):
        if not 0 <= self.diameter <= self.center.level:
            raise InvalidInputError(
                f"diameter {self.diameter} outside [0, level={self.center.level}]"
            )

    @property
    def size(self) -> int:
        return self.center.N**self.diameter

    @property
    def base_id(self) -> int:
        """Smallest id in the ball (balls are aligned id blocks)."""
        return (self.center.id // self.size) * self.size


@dataclass(frozen=True)
class AnnulusSpec:
    """Annulus (inner, outer]: the outer ball minus the inner ball, around 0."""

    inner: int
    outer: int

    def __post_init__(self):
        if not 0 <= self.inner < self.outer:
            raise InvalidInputError(
                f"need 0 <= inner < outer, got ({self.inner}, {self.outer}]"
            )

    def size(self, N: int) -> int:
        return N**self.outer - N**self.inner


def hdist(x: HAddress, y: HAddress) -> int:
    """Hierarchical distance: most significant differing base-N digit position.

    Returns 0 iff x == y.  Equals min{d : x.id // N**d == y.id // N**d}.
    """
    if x.N != y.N or x.level != y.level:
        raise InvalidInputError("addresses must share N and level")
    return hdist_ids(x.id, y.id, x.N)


def hdist_ids(a: int, b: int, N: int) -> int:
    d = 0
    while a != b:
        a //= N
        b //= N
        d += 1
    return d


def hdist_from(ids: np.ndarray, center: int, N: int) -> np.ndarray:
    """Vectorised hierarchical distances from `center` to each id."""
    a = np.asarray(ids, dtype=np.int64).copy()
    c = int(center)
    d = np.zeros(a.shape, dtype=np.int64)
    while True:
        mask = a != c
        if not mask.any():
            break
        d[mask] += 1
        a //= N
        c //= N
    return d


def ball_ids(center_id: int, diameter: int, N: int) -> np.ndarray:
    """Ids of the ball of given diameter containing `center_id`."""
    size = N**diameter
    base = (center_id // size) * size
    return np.arange(base, base + size, dtype=np.int64)


def enumerate_ball(b: BallSpec, max_size: int = DEFAULT_VERTEX_BUDGET):
    """All addresses of the ball, as HAddress values."""
    if b.size > max_size:
        raise CapacityError(f"ball holds {b.size} points, budget {max_size}")
    lvl, N = b.center.level, b.center.N
    return [HAddress(int(i), lvl, N) for i in ball_ids(b.center.id, b.diameter, N)]


def shell_pair_count(N: int, k: int, j: int) -> int:
    """Unordered pairs at distance exactly j inside a ball of diameter k.

    Each of the N**k points sees (N**j - N**(j-1)) points at distance j, so
    the count is N**k * (N - 1) * N**(j-1) / 2.  Summed over j = 1..k this
    gives C(N**k, 2).  Exact integer arithmetic.
    """
    if not 1 <= j <= k:
        raise InvalidInputError(f"need 1 <= j <= k, got j={j}, k={k}")
    return N**k * (N - 1) * N ** (j - 1) // 2
