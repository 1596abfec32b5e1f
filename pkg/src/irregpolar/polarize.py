"""Irregular channel polarization over ``N`` heterogeneous leaf channels.

Index conventions are 0-based throughout: leaf ``i`` carries codeword bit
``x[i]`` of ``x = u G_N`` and synthesized channel ``i`` carries ``u[i]``.

At level ``Q`` the transform combines, inside every block of ``2Q``
consecutive indices, channel ``j`` of the first half with channel ``j`` of
the second half into the pair ``(minus, plus)`` stored at block-local
positions ``(2j, 2j + 1)``.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import (DiscreteChannel, bhattacharyya, capacity,
                       erasure_probability, sample)
from .sc import sc_decode
from .transform import log2_length, polar_transform

METHODS = ("exact", "bec_exact", "merge", "monte_carlo")
EXACT_MAX_N = 16


class ConstructionError(ValueError):
    """Construction method incompatible with the leaves or the size."""


class ConstructionBudgetError(ConstructionError):
    """The requested construction is too large to carry out exactly."""


@dataclass(frozen=True)
class ChannelArray:
    """``N = 2**n`` leaf channels; leaf ``i`` acts on codeword position ``i``."""

    leaves: tuple

    def __post_init__(self):
        object.__setattr__(self, "leaves", tuple(self.leaves))
        if log2_length(len(self.leaves)) < 1:
            raise ValueError("need at least two leaves")
        for ch in self.leaves:
            if not isinstance(ch, DiscreteChannel):
                raise TypeError(f"leaf {ch!r} is not a DiscreteChannel")

    @property
    def N(self) -> int:
        return len(self.leaves)

    @property
    def n(self) -> int:
        return log2_length(self.N)

    def __len__(self):
        return self.N

    def __getitem__(self, i):
        return self.leaves[i]

    def __iter__(self):
        return iter(self.leaves)


@dataclass(frozen=True)
class SynthChannelParams:
    """Per-index reliability of the synthesized channels."""

    z: np.ndarray
    i_cap: np.ndarray
    method: str
    exact_channels: tuple | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return len(self.z)

    def to_rows(self):
        for i, (z, c) in enumerate(zip(self.z.tolist(), self.i_cap.tolist())):
            yield i, z, c, self.method


@dataclass(frozen=True)
class PolarizedSets:
    high: frozenset
    low: frozenset
    beta: float
    delta: float


# --------------------------------------------------------------------------
# 2x2 kernel

def _minus_table(p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    # column index y1 * M2 + y2
    t0 = 0.5 * (np.outer(p1[0], p2[0]) + np.outer(p1[1], p2[1]))
    t1 = 0.5 * (np.outer(p1[1], p2[0]) + np.outer(p1[0], p2[1]))
    return np.stack([t0.ravel(), t1.ravel()])


def _plus_table(p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    # column index (y1 * M2 + y2) * 2 + u1
    M1, M2 = p1.shape[1], p2.shape[1]
    out = np.empty((2, M1, M2, 2))
    for u2 in (0, 1):
        for u1 in (0, 1):
            out[u2, :, :, u1] = 0.5 * np.outer(p1[u1 ^ u2], p2[u2])
    return out.reshape(2, -1)


def _labelled(w1, w2, with_u1: bool):
    if not (w1.has_labels or w2.has_labels) or w1.size * w2.size > 1 << 16:
        return None
    pairs = [(a, b) for a in w1.outputs for b in w2.outputs]
    if with_u1:
        return [(a, b, u) for a, b in pairs for u in (0, 1)]
    return pairs


def kernel_minus(w1: DiscreteChannel, w2: DiscreteChannel) -> DiscreteChannel:
    """The degraded channel ``u1 -> (y1, y2)`` with ``u2`` uniform and unknown.

    Outputs are the ordered pairs ``(y1, y2)``.
    """
    t = _minus_table(w1.p, w2.p)
    return DiscreteChannel(t[0], t[1], _labelled(w1, w2, False))


def kernel_plus(w1: DiscreteChannel, w2: DiscreteChannel) -> DiscreteChannel:
    """The upgraded channel ``u2 -> (y1, y2, u1)``."""
    t = _plus_table(w1.p, w2.p)
    return DiscreteChannel(t[0], t[1], _labelled(w1, w2, True))


# --------------------------------------------------------------------------
# alphabet reduction

def compress(p: np.ndarray, decimals: int = 10) -> np.ndarray:
    """Merge outputs with equal likelihood ratio and drop null outputs.

    Merging outputs with identical ratio is lossless for both ``Z`` and
    ``I``.  The result is sorted by increasing LLR.
    """
    keep = (p[0] + p[1]) > 0
    p = p[:, keep]
    with np.errstate(divide="ignore"):
        key = np.log(p[0]) - np.log(p[1])
    finite = np.isfinite(key)
    key[finite] = np.round(key[finite], decimals)
    uniq, inv = np.unique(key, return_inverse=True)
    out = np.zeros((2, len(uniq)))
    np.add.at(out[0], inv, p[0])
    np.add.at(out[1], inv, p[1])
    return out


def _contrib(a0: float, a1: float) -> float:
    s = a0 + a1
    c = 0.0
    if a0 > 0:
        c += a0 * math.log2(2 * a0 / s)
    if a1 > 0:
        c += a1 * math.log2(2 * a1 / s)
    return 0.5 * c


def degrading_merge(p: np.ndarray, mu: int) -> np.ndarray:
    """Reduce to at most ``mu`` outputs by greedy capacity-loss merging.

    Outputs are first merged losslessly and sorted by LLR; then the
    LLR-adjacent pair whose merge loses the least capacity is merged,
    repeatedly, ties going to the lower position.  Merging never decreases
    ``Z``, so the result upper-bounds the Bhattacharyya parameter.
    """
    if mu < 2:
        raise ValueError("mu must be at least 2")
    p = compress(p)
    M = p.shape[1]
    if M <= mu:
        return p
    a0 = p[0].tolist()
    a1 = p[1].tolist()
    c = [_contrib(x, y) for x, y in zip(a0, a1)]
    nxt = list(range(1, M)) + [-1]
    prv = list(range(-1, M - 1))
    ver = [0] * M
    alive = [True] * M

    def loss(i, j):
        return c[i] + c[j] - _contrib(a0[i] + a0[j], a1[i] + a1[j])

    heap = [(loss(i, i + 1), i, i + 1, 0, 0) for i in range(M - 1)]
    heapq.heapify(heap)
    count = M
    while count > mu:
        d, i, j, vi, vj = heapq.heappop(heap)
        if not (alive[i] and alive[j] and ver[i] == vi and ver[j] == vj):
            continue
        a0[i] += a0[j]
        a1[i] += a1[j]
        c[i] = _contrib(a0[i], a1[i])
        ver[i] += 1
        alive[j] = False
        k = nxt[j]
        nxt[i] = k
        if k >= 0:
            prv[k] = i
            heapq.heappush(heap, (loss(i, k), i, k, ver[i], ver[k]))
        h = prv[i]
        if h >= 0:
            heapq.heappush(heap, (loss(h, i), h, i, ver[h], ver[i]))
        count -= 1
    cols = [i for i in range(M) if alive[i]]
    out = np.array([[a0[i] for i in cols], [a1[i] for i in cols]])
    return out / out.sum(axis=1, keepdims=True)


# --------------------------------------------------------------------------
# construction

def bec_recursion(eps: Sequence[float]) -> SynthChannelParams:
    """Exact synthesized capacities for erasure leaves.

    Uses ``I(minus) = I1 I2`` and ``I(plus) = I1 + I2 - I1 I2``.
    """
    e = np.asarray(eps, dtype=float)
    N = e.size
    n = log2_length(N)
    if n < 1:
        raise ValueError("need at least two leaves")
    if np.any((e < 0) | (e > 1)):
        raise ValueError("erasure probabilities must lie in [0, 1]")
    cap = 1.0 - e
    Q = 1
    for _ in range(n):
        v = cap.reshape(N // (2 * Q), 2, Q)
        a, b = v[:, 0, :], v[:, 1, :]
        prod = a * b
        cap = np.stack([prod, a + b - prod], axis=-1).reshape(N)
        Q *= 2
    z = 1.0 - cap
    # store I as 1 - Z so the identity holds bit-for-bit
    return SynthChannelParams(z=z, i_cap=1.0 - z, method="bec_exact")


def _level_pairs(N: int, Q: int):
    # (first, second, out_minus, out_plus) for one level
    for k in range(N // (2 * Q)):
        base = 2 * k * Q
        for j in range(Q):
            yield base + j, base + Q + j, base + 2 * j, base + 2 * j + 1


def _recursive_tables(tables, reduce, threads):
    N = len(tables)
    Q = 1
    pool = ThreadPoolExecutor(max_workers=threads) if threads and threads > 1 else None

    def combine(args):
        a, b = args
        return reduce(_minus_table(a, b)), reduce(_plus_table(a, b))

    try:
        while Q < N:
            pairs = list(_level_pairs(N, Q))
            jobs = [(tables[f], tables[s]) for f, s, _, _ in pairs]
            results = list(pool.map(combine, jobs)) if pool else [combine(j) for j in jobs]
            new = [None] * N
            for (_, _, om, op), (tm, tp) in zip(pairs, results):
                new[om], new[op] = tm, tp
            tables = new
            Q *= 2
    finally:
        if pool:
            pool.shutdown()
    return tables


def _params_from_tables(tables, method, keep):
    chans = tuple(DiscreteChannel(t[0], t[1]) for t in tables)
    z = np.array([bhattacharyya(ch) for ch in chans])
    cap = np.array([min(1.0, max(0.0, capacity(ch))) for ch in chans])
    return SynthChannelParams(z=z, i_cap=cap, method=method,
                              exact_channels=chans if keep else None)


def _normalized(t):
    return t / t.sum(axis=1, keepdims=True)


def construct(leaves, method: str = "merge", *, mu: int = 128, trials: int = 10_000,
              seed: int = 0, threads: int | None = None, lossless: bool = True,
              batch: int = 1000) -> SynthChannelParams:
    """Compute ``Z`` and ``I`` of every synthesized channel.

    Parameters
    ----------
    leaves : ChannelArray or sequence of DiscreteChannel
    method : {'exact', 'bec_exact', 'merge', 'monte_carlo'}
        ``exact`` builds every synthesized channel explicitly (N <= 16);
        ``bec_exact`` needs BEC-equivalent leaves; ``merge`` caps every
        intermediate alphabet at ``mu`` outputs; ``monte_carlo`` estimates
        from ``trials`` genie-aided SC runs seeded by ``seed``.
    lossless : bool
        For ``exact``: merge equal-likelihood-ratio outputs after every
        kernel step.  Turn off to keep the raw product alphabets.
    threads : int, optional
        Worker threads for independent kernel applications or sample
        batches.  Results do not depend on it.
    """
    arr = leaves if isinstance(leaves, ChannelArray) else ChannelArray(tuple(leaves))
    N = arr.N
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")

    if method == "bec_exact":
        eps = [erasure_probability(ch) for ch in arr]
        bad = [i for i, e in enumerate(eps) if e is None]
        if bad:
            raise ConstructionError(f"bec_exact needs erasure leaves; leaf {bad[0]} is not one")
        return bec_recursion(eps)

    if method == "exact":
        if N > EXACT_MAX_N:
            raise ConstructionBudgetError(f"exact construction is limited to N <= {EXACT_MAX_N}")
        reduce = compress if lossless else (lambda t: t)
        tables = _recursive_tables([ch.p for ch in arr], reduce, threads)
        return _params_from_tables(tables, "exact", keep=True)

    if method == "merge":
        tables = _recursive_tables([ch.p for ch in arr],
                                   lambda t: _normalized(degrading_merge(t, mu)), threads)
        return _params_from_tables(tables, "merge", keep=False)

    return _monte_carlo(arr, trials, seed, threads, batch)


def _monte_carlo(arr: ChannelArray, trials: int, seed: int, threads, batch: int):
    # Z = E[sqrt(W(y|1-u)/W(y|u))] and I = E[1 - log2(1 + W(y|1-u)/W(y|u))]
    # under uniform u, with the genie-aided SC LLR of each position.
    if trials < 1:
        raise ValueError("trials must be positive")
    N = arr.N
    llr_tables = [ch.llr() for ch in arr]
    chunks = [(k, min(batch, trials - k * batch)) for k in range((trials + batch - 1) // batch)]

    def run(chunk):
        k, size = chunk
        rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
        u = rng.integers(0, 2, size=(size, N), dtype=np.uint8)
        x = polar_transform(u)
        llr = np.empty((size, N))
        for i, ch in enumerate(arr):
            llr[:, i] = llr_tables[i][sample(ch, x[:, i], rng)]
        _, L = sc_decode(llr, np.ones(N, dtype=bool), u, clip=700.0, record=True)
        s = np.where(u == 1, -L, L)
        return np.exp(-0.5 * s).sum(axis=0), (1.0 - np.logaddexp(0.0, -s) / math.log(2)).sum(axis=0)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    zs = np.zeros(N)
    cs = np.zeros(N)
    for a, b in parts:
        zs += a
        cs += b
    return SynthChannelParams(z=np.clip(zs / trials, 0.0, 1.0),
                              i_cap=np.clip(cs / trials, 0.0, 1.0), method="monte_carlo")


# --------------------------------------------------------------------------
# polarized index sets

def polarized_sets(params: SynthChannelParams, beta: float = 0.3) -> PolarizedSets:
    """Split indices by ``Z >= 1 - delta`` (high) and ``Z <= delta`` (low).

    ``delta = 2 ** -(N ** beta)`` with ``0 < beta < 1/2``.
    """
    if not 0.0 < beta < 0.5:
        raise ValueError(f"beta must lie strictly between 0 and 1/2, got {beta}")
    N = params.N
    delta = 2.0 ** (-(N ** beta))
    z = params.z
    high = frozenset(np.flatnonzero(z >= 1.0 - delta).tolist())
    low = frozenset(np.flatnonzero(z <= delta).tolist())
    return PolarizedSets(high=high, low=low, beta=beta, delta=delta)


def selected_z_sum(params: SynthChannelParams, rate: float) -> float:
    """Sum of the ``floor(N * rate)`` smallest ``Z`` values (at least one)."""
    mean_i = float(np.mean(params.i_cap))
    if not 0.0 < rate < mean_i:
        raise ValueError(f"rate must lie in (0, {mean_i}), got {rate}")
    k = max(1, int(math.floor(params.N * rate)))
    return float(np.sort(params.z)[:k].sum())
