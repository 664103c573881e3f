"""Pure-numpy fallback for the compiled double-sum kernel.

Same contract as _kernels.pair_double_sum. The pair terms are
materialized explicitly with blocked outer products (never factorized
into a product of single sums, which would assume the identity the
oracle exists to test) and reduced block-by-block with compensated
accumulation across blocks.
"""

from __future__ import annotations

import numpy as np

from .quadrature import neumaier_sum

# fixed block height keeps the reduction order, and hence the rounding,
# independent of input size or environment
_BLOCK = 256


def pair_double_sum(u: np.ndarray, v: np.ndarray, p: np.ndarray) -> float:
    """sum_{j,l} [ (u[j] v[l] + u[l] v[j]) / 2 + p[j] p[l] ] over all ordered
    pairs (j, l), including the diagonal."""
    u = np.ascontiguousarray(u, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    p = np.ascontiguousarray(p, dtype=np.float64)
    n = u.shape[0]
    if v.shape[0] != n or p.shape[0] != n:
        raise ValueError("u, v, p must have equal length")
    block_sums = []
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        cell = 0.5 * np.outer(u[start:stop], v)
        cell += 0.5 * np.outer(v[start:stop], u)
        cell += np.outer(p[start:stop], p)
        block_sums.append(float(np.sum(cell)))
    return neumaier_sum(block_sums)
