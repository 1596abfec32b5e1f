"""Static adversarial wiretap channel: the adversary's read/rewrite sets and
the equivalent channels that model them."""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .channels import (ERASURE, DiscreteChannel, capacity, cascade,
                       degenerate_bec)
from .polarize import ChannelArray


def set_size(N: int, rho: float) -> int:
    """``round(N * rho)`` with halves rounded up."""
    return int(math.floor(N * rho + 0.5))


@dataclass(frozen=True)
class AdversarySpec:
    """Read/rewrite fractions and the per-block index sets (0-based).

    ``read_sets[t]`` and ``write_sets[t]`` are the positions Eve reads from
    the wiretap output and erases from the main output in block ``t``.
    """

    N: int
    rho_r: float
    rho_w: float
    read_sets: tuple
    write_sets: tuple

    def __post_init__(self):
        for name in ("rho_r", "rho_w"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        reads = tuple(frozenset(int(i) for i in s) for s in self.read_sets)
        writes = tuple(frozenset(int(i) for i in s) for s in self.write_sets)
        if len(reads) != len(writes) or not reads:
            raise ValueError("need the same positive number of read and write sets")
        nr, nw = set_size(self.N, self.rho_r), set_size(self.N, self.rho_w)
        for t, (r, w) in enumerate(zip(reads, writes)):
            if len(r) != nr:
                raise ValueError(f"block {t}: read set has {len(r)} indices, expected {nr}")
            if len(w) != nw:
                raise ValueError(f"block {t}: write set has {len(w)} indices, expected {nw}")
            for i in r | w:
                if not 0 <= i < self.N:
                    raise ValueError(f"block {t}: index {i} outside [0, {self.N})")
        object.__setattr__(self, "read_sets", reads)
        object.__setattr__(self, "write_sets", writes)

    @property
    def T(self) -> int:
        return len(self.read_sets)

    def _check_block(self, t: int):
        if not 0 <= t < self.T:
            raise IndexError(f"block {t} outside [0, {self.T})")

    def read_set(self, t: int) -> frozenset:
        self._check_block(t)
        return self.read_sets[t]

    def write_set(self, t: int) -> frozenset:
        self._check_block(t)
        return self.write_sets[t]


def random_adversary(N: int, T: int, rho_r: float, rho_w: float, seed: int) -> AdversarySpec:
    """Uniformly random read and write sets, drawn independently per block."""
    rng = np.random.default_rng(seed)
    nr, nw = set_size(N, rho_r), set_size(N, rho_w)
    reads, writes = [], []
    for _ in range(T):
        reads.append(rng.choice(N, size=nr, replace=False).tolist())
        writes.append(rng.choice(N, size=nw, replace=False).tolist())
    return AdversarySpec(N, rho_r, rho_w, tuple(reads), tuple(writes))


def _mask(N: int, idx: frozenset) -> np.ndarray:
    m = np.zeros(N, dtype=bool)
    m[list(idx)] = True
    return m


def apply_rewrite(v, spec: AdversarySpec, t: int) -> np.ndarray:
    """Replace the symbols at the block's write positions by ``'?'``.

    Works along the last axis, so a batch of vectors can be passed.
    """
    w = spec.write_set(t)
    y = np.array(v, dtype=object)
    if y.shape[-1] != spec.N:
        raise ValueError(f"expected vectors of length {spec.N}")
    y[..., _mask(spec.N, w)] = ERASURE
    return y


def apply_read(v_tilde, spec: AdversarySpec, t: int) -> np.ndarray:
    """Keep the symbols at the block's read positions, ``'?'`` elsewhere."""
    r = spec.read_set(t)
    z = np.array(v_tilde, dtype=object)
    if z.shape[-1] != spec.N:
        raise ValueError(f"expected vectors of length {spec.N}")
    z[..., ~_mask(spec.N, r)] = ERASURE
    return z


def _block_length(spec, N):
    if N is not None and N != spec.N:
        raise ValueError(f"adversary is defined for N={spec.N}, not {N}")
    return spec.N


def equivalent_main(W: DiscreteChannel, spec: AdversarySpec, t: int, N: int | None = None) -> ChannelArray:
    """Bob's leaves: ``W`` cascaded with the full-erasure BEC where Eve rewrites."""
    N = _block_length(spec, N)
    w = spec.write_set(t)
    erased, kept = cascade(W, degenerate_bec("eps1")), cascade(W, degenerate_bec("eps0"))
    return ChannelArray(tuple(erased if i in w else kept for i in range(N)))


def equivalent_wiretap(W_tilde: DiscreteChannel, spec: AdversarySpec, t: int,
                       N: int | None = None) -> ChannelArray:
    """Eve's leaves: ``W_tilde`` where she reads, full erasure elsewhere."""
    N = _block_length(spec, N)
    r = spec.read_set(t)
    seen, blind = cascade(W_tilde, degenerate_bec("eps0")), cascade(W_tilde, degenerate_bec("eps1"))
    return ChannelArray(tuple(seen if i in r else blind for i in range(N)))


@dataclass(frozen=True)
class EquivalentChannels:
    main_eq: ChannelArray
    wiretap_eq: ChannelArray


def equivalent_channels(W, W_tilde, spec: AdversarySpec, t: int) -> EquivalentChannels:
    return EquivalentChannels(equivalent_main(W, spec, t), equivalent_wiretap(W_tilde, spec, t))


def secrecy_capacity(W: DiscreteChannel, W_tilde: DiscreteChannel, rho_r: float, rho_w: float) -> float:
    """``(1 - rho_w) I(W) - rho_r I(W_tilde)`` for uniform input, floored at 0."""
    for v in (rho_r, rho_w):
        if not 0.0 <= v <= 1.0:
            raise ValueError("fractions must lie in [0, 1]")
    return max(0.0, (1.0 - rho_w) * capacity(W) - rho_r * capacity(W_tilde))


def _noiseless(ch: DiscreteChannel) -> bool:
    return abs(capacity(ch) - 1.0) <= 1e-12


def _same(a: DiscreteChannel, b: DiscreteChannel) -> bool:
    return a.size == b.size and a.outputs == b.outputs and bool(np.allclose(a.p, b.p, atol=1e-12))


def special_cases(W, W_tilde, rho_r: float, rho_w: float) -> list[str]:
    """Names of the classical models that the parameters reduce to."""
    labels = []
    main_clean, tap_clean = _noiseless(W), _noiseless(W_tilde)
    if rho_w == 0 and rho_r == 0:
        labels.append("non-degraded WTC")
    if rho_w == 0 and main_clean and tap_clean:
        labels.append("WTC-II")
    if rho_w == 0 and tap_clean and not main_clean:
        labels.append("extended WTC-II (noiseless wiretap)")
    if rho_w == 0 and _same(W, W_tilde):
        labels.append("extended WTC-II (identical channels)")
    if main_clean and tap_clean:
        labels.append("A-WTC (noiseless)")
    return labels
