"""Deterministic seed derivation and exact discrete sampling helpers.

Every stochastic routine in the package derives its randomness from a single
64-bit experiment seed through `derive_key` / `substream`.  Substreams are
keyed by (domain, index) so the order in which shells, replicas or levels are
processed never changes the result.

The splitmix64 mixer is also re-implemented verbatim inside the compiled and
fallback kernels; the constants here are the single source of truth.
"""

import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# Substream domains.  Values are arbitrary but frozen: changing them changes
# every sampled object.
STREAM_SHELL = 1
STREAM_THIN = 2
STREAM_RENORM = 3
STREAM_WALK = 4
STREAM_TIE = 5
STREAM_REPLICA = 6
STREAM_CUTSET_LAW = 7


def mix64(z: int) -> int:
    """splitmix64 finalizer on python ints (64-bit wrapping)."""
    z &= MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK64
    z ^= z >> 31
    return z


def derive_key(seed: int, index: int) -> int:
    """64-bit child key for substream `index` of `seed`."""
    return mix64((seed + GOLDEN_GAMMA * (index + 1)) & MASK64)


def substream(seed: int, *indices: int) -> int:
    """Chain `derive_key` over a path of indices."""
    key = seed & MASK64
    for idx in indices:
        key = derive_key(key, idx)
    return key


def generator(seed: int, *indices: int) -> np.random.Generator:
    """PCG64 generator seeded from the derived substream key."""
    return np.random.Generator(np.random.PCG64(substream(seed, *indices)))


# Vectorised splitmix64 used by the fallback walk kernel.  Must match the
# scalar version bit for bit (uint64 arithmetic wraps like C).

_U64 = np.uint64
_C1 = _U64(0xBF58476D1CE4E5B9)
_C2 = _U64(0x94D049BB133111EB)
GAMMA_U64 = _U64(GOLDEN_GAMMA)
U01_SCALE = 1.0 / 9007199254740992.0  # 2**-53


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> _U64(30))
    z = z * _C1
    z = z ^ (z >> _U64(27))
    z = z * _C2
    z = z ^ (z >> _U64(31))
    return z


def derive_key_array(seed: int, indices: np.ndarray) -> np.ndarray:
    idx = indices.astype(np.uint64)
    return mix64_array(_U64(seed & MASK64) + GAMMA_U64 * (idx + _U64(1)))


def uniform_from_bits(z: np.ndarray) -> np.ndarray:
    """Map uint64 words to float64 uniforms in [0, 1)."""
    return (z >> _U64(11)).astype(np.float64) * U01_SCALE


def exact_binomial(rng: np.random.Generator, n: int, p: float) -> int:
    """Exact Binomial(n, p) draw robust to huge n and tiny p.

    Defers to the generator's own exact sampler inside int64 range as long
    as p is large enough that 1 - p is representable (numpy computes with q;
    below ~2^-53 its inversion silently returns 0).  Otherwise successes are
    drawn by CDF inversion on the binomial pmf via log1p, chunking n so each
    chunk has a moderate mean.  No Poisson approximation anywhere.
    """
    if p <= 0.0:
        return 0
    if p >= 1.0:
        return int(n)
    if n <= (1 << 62) and p >= 1e-9:
        return int(rng.binomial(n, p))
    mean = n * p
    if mean <= 300.0:
        return _binomial_inversion(rng, n, p)
    chunk = int(300.0 / p)
    n_chunks = -(-int(n) // chunk)
    if n_chunks > 10000:
        raise ValueError(f"binomial mean {mean:.3g} too large for inversion")
    total = 0
    remaining = int(n)
    while remaining > 0:
        m = min(chunk, remaining)
        total += _binomial_inversion(rng, m, p)
        remaining -= m
    return total


def _binomial_inversion(rng: np.random.Generator, n: int, p: float) -> int:
    """CDF inversion on the binomial pmf; exact to float64 rounding."""
    u = rng.random()
    nf = float(n)
    pmf = math.exp(nf * math.log1p(-p))
    cum = pmf
    ratio = p / (1.0 - p)
    mean = nf * p
    k = 0
    cap = int(mean + 20.0 * math.sqrt(mean + 1.0) + 60.0)
    while u > cum and k < cap:
        k += 1
        pmf *= (nf - (k - 1)) / k * ratio
        cum += pmf
    return k
