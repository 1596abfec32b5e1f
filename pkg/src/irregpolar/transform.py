"""The GF(2) polar transform ``x = u G_N`` with ``G_N = R F^{(x)n}``."""

from __future__ import annotations

import numpy as np

KERNEL = np.array([[1, 0], [1, 1]], dtype=np.uint8)


def log2_length(N: int) -> int:
    """``n`` with ``N == 2**n``; raises for anything else."""
    N = int(N)
    if N < 1 or N & (N - 1):
        raise ValueError(f"block length must be a power of two, got {N}")
    return N.bit_length() - 1


def bit_reversal(N: int) -> np.ndarray:
    """Permutation ``j -> bitrev_n(j)`` on ``range(N)``."""
    n = log2_length(N)
    idx = np.arange(N)
    rev = np.zeros(N, dtype=np.intp)
    for b in range(n):
        rev |= ((idx >> b) & 1) << (n - 1 - b)
    return rev


def generator_matrix(N: int) -> np.ndarray:
    """Explicit ``R F^{(x)n}`` over GF(2); ``O(N^2)`` memory, for small N."""
    n = log2_length(N)
    G = np.ones((1, 1), dtype=np.uint8)
    for _ in range(n):
        G = np.kron(G, KERNEL)
    return G[bit_reversal(N)]


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Compute ``u G_N`` along the last axis in ``O(N log N)``.

    Self-inverse over GF(2).
    """
    u = np.asarray(u)
    N = u.shape[-1]
    n = log2_length(N)
    x = (u & 1).astype(np.uint8, copy=True)
    lead = x.shape[:-1]
    s = N // 2
    for _ in range(n):
        v = x.reshape(*lead, N // (2 * s), 2, s)
        v[..., 0, :] ^= v[..., 1, :]
        s //= 2
    return x[..., bit_reversal(N)]
