"""Kernel dispatch: compiled extension when available, numpy fallback otherwise.

Set HIERPERC_PURE_PYTHON=1 to force the fallback.  Both implementations are
bit-for-bit interchangeable (asserted by the parity tests), so the selection
never changes results, only speed.
"""

import os

import numpy as np

from . import _pykernels

if os.environ.get("HIERPERC_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

IMPLEMENTATION = _impl.IMPLEMENTATION


def union_labels(n, u, v):
    u = np.ascontiguousarray(u, dtype=np.int64)
    v = np.ascontiguousarray(v, dtype=np.int64)
    return _impl.union_labels(n, u, v)


def simulate_walks(indptr, indices, start, absorb, max_steps, replicas, seed,
                   stop_on_return=False):
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    absorb_u8 = np.ascontiguousarray(absorb, dtype=np.uint8)
    if absorb_u8[start]:
        raise ValueError("start vertex must not be absorbing")
    return _impl.simulate_walks(indptr, indices, int(start), absorb_u8,
                                int(max_steps), int(replicas),
                                int(seed) & 0xFFFFFFFFFFFFFFFF,
                                bool(stop_on_return))


def renorm_population_step(pop, idx, upair, log1m_base, scale):
    pop = np.ascontiguousarray(pop, dtype=np.float64)
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    upair = np.ascontiguousarray(upair, dtype=np.float64)
    return _impl.renorm_population_step(pop, idx, upair, float(log1m_base),
                                        float(scale))
