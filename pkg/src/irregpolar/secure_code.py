"""Index partition, multi-block chaining, encoding and SC decoding.

Per block ``t`` the positions split into

* ``info``    reliable for Bob, useless to Eve: message bits and relay bits,
* ``frozen``  unreliable for Bob, useless to Eve: fixed to 0,
* ``random``  reliable for Bob, informative to Eve: fresh uniform bits,
* ``chained`` unreliable for Bob, informative to Eve: bits Bob already
  knows (pre-shared for the first block, relayed afterwards),

and ``relay`` is the subset of ``info`` that carries uniform bits which
become the next block's ``chained`` values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .awtc import AdversarySpec, equivalent_main, equivalent_wiretap
from .channels import DiscreteChannel, erasure_probability
from .polarize import construct, polarized_sets
from .sc import sc_decode
from .transform import log2_length, polar_transform

LLR_CLIP = 40.0


class ChainError(ValueError):
    """The next block needs more relay bits than this block can carry."""


def _sorted(s) -> np.ndarray:
    return np.array(sorted(s), dtype=np.intp)


@dataclass(frozen=True)
class IndexPartition:
    N: int
    info: frozenset
    frozen: frozenset
    random: frozenset
    chained: frozenset
    relay: frozenset = frozenset()

    def __post_init__(self):
        parts = (self.info, self.frozen, self.random, self.chained)
        total = sum(len(p) for p in parts)
        union = frozenset().union(*parts)
        if total != len(union) or union != frozenset(range(self.N)):
            raise ValueError("info/frozen/random/chained must partition range(N)")
        if not self.relay <= self.info:
            raise ValueError("relay positions must be a subset of info")

    @property
    def message(self) -> frozenset:
        return self.info - self.relay

    @property
    def n_message(self) -> int:
        return len(self.info) - len(self.relay)


def partition(low_main, high_wiretap, N: int) -> IndexPartition:
    """Four-way split from Bob's reliable set and Eve's useless set."""
    full = frozenset(range(N))
    L, H = frozenset(low_main), frozenset(high_wiretap)
    if not (L <= full and H <= full):
        raise ValueError("index sets must lie in range(N)")
    return IndexPartition(N=N, info=L & H, frozen=H - L, random=L - H,
                          chained=full - L - H)


def chain_plan(partitions: Sequence[IndexPartition], main_z: Sequence[np.ndarray]) -> list[frozenset]:
    """Pick ``relay`` sets: the ``|chained[t+1]|`` most reliable info indices.

    Reliability is Bob's ``Z`` for the block; ties go to the lower index.
    The last block relays nothing.
    """
    T = len(partitions)
    if len(main_z) != T:
        raise ValueError("need one Z vector per block")
    relays = []
    for t, part in enumerate(partitions):
        need = len(partitions[t + 1].chained) if t + 1 < T else 0
        if need > len(part.info):
            raise ChainError(
                f"block {t + 1} needs {need} relay bits but block {t} has only "
                f"{len(part.info)} info positions; use a larger N or a lower rate")
        info = _sorted(part.info)
        z = np.asarray(main_z[t])[info]
        order = np.lexsort((info, z))
        relays.append(frozenset(info[order[:need]].tolist()))
    return relays


def with_relays(partitions, relays) -> tuple:
    return tuple(replace(p, relay=r) for p, r in zip(partitions, relays))


def gn_transform(u) -> np.ndarray:
    """``u G_N`` over GF(2) along the last axis; an involution."""
    return polar_transform(u)


# --------------------------------------------------------------------------
# sessions

@dataclass(frozen=True)
class SessionConfig:
    """Everything both parties agree on before the first block."""

    N: int
    partitions: tuple
    master_seed: int = 0
    preshared_seed: int = 1
    frozen_value: int = 0
    main_leaves: tuple | None = field(default=None, repr=False)
    main_params: tuple | None = field(default=None, repr=False)
    wiretap_params: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        log2_length(self.N)
        if not self.partitions:
            raise ValueError("need at least one block")
        if self.frozen_value != 0:
            raise ValueError("frozen bits are fixed to 0")
        last = self.partitions[-1]
        if last.relay:
            raise ValueError("the last block cannot relay bits")
        for t in range(self.T - 1):
            if len(self.partitions[t].relay) != len(self.partitions[t + 1].chained):
                raise ValueError(f"relay set of block {t} does not match chained set of block {t + 1}")

    @property
    def T(self) -> int:
        return len(self.partitions)


def preshared_bits(config: SessionConfig) -> np.ndarray:
    n = len(config.partitions[0].chained)
    return np.random.default_rng(config.preshared_seed).integers(0, 2, n, dtype=np.uint8)


@dataclass
class SessionState:
    """Per-party running state; arrays may carry a leading batch axis."""

    preshared: np.ndarray
    rng: np.random.Generator | None = None
    u: list = field(default_factory=list)
    x: list = field(default_factory=list)
    relay: list = field(default_factory=list)


def _chained_values(part: IndexPartition, state: SessionState, t: int):
    if t == 0:
        vals = np.asarray(state.preshared, dtype=np.uint8)
    else:
        if len(state.relay) < t:
            raise ValueError(f"missing relay bits from block {t - 1}")
        vals = np.asarray(state.relay[t - 1], dtype=np.uint8)
    if vals.shape[-1] != len(part.chained):
        raise ValueError(f"block {t} needs {len(part.chained)} chained bits, got {vals.shape[-1]}")
    return vals


def encode_block(message, part: IndexPartition, state: SessionState, t: int,
                 random_bits=None) -> np.ndarray:
    """Fill ``u`` for block ``t`` and return ``x = u G_N``.

    ``random_bits`` covers the random and relay positions in increasing
    index order; by default it comes from ``state.rng``.
    """
    if t != len(state.u):
        raise ValueError(f"blocks must be encoded in order; expected block {len(state.u)}")
    message = np.asarray(message, dtype=np.uint8)
    if message.shape[-1] != part.n_message:
        raise ValueError(f"block {t} carries {part.n_message} message bits, got {message.shape[-1]}")
    lead = message.shape[:-1]
    rand_pos = _sorted(part.random | part.relay)
    if random_bits is None:
        if state.rng is None:
            raise ValueError("no random bits and no generator")
        random_bits = state.rng.integers(0, 2, (*lead, len(rand_pos)), dtype=np.uint8)
    chained = _chained_values(part, state, t)
    u = np.zeros((*lead, part.N), dtype=np.uint8)
    u[..., _sorted(part.message)] = message
    u[..., rand_pos] = random_bits
    u[..., _sorted(part.chained)] = chained
    x = gn_transform(u)
    state.u.append(u)
    state.x.append(x)
    state.relay.append(u[..., _sorted(part.relay)])
    return x


def leaf_llrs(leaves, y, clip: float = LLR_CLIP) -> np.ndarray:
    """Channel LLRs for received labels ``y`` (shape ``(..., N)``)."""
    y = np.asarray(y, dtype=object)
    N = len(leaves)
    if y.shape[-1] != N:
        raise ValueError(f"received vector has length {y.shape[-1]}, expected {N}")
    alphabet = {}
    for ch in {id(c): c for c in leaves}.values():
        for lab in ch.outputs:
            alphabet.setdefault(lab, len(alphabet))
    table = np.full((N, len(alphabet)), np.nan)
    cache = {}
    for i, ch in enumerate(leaves):
        row = cache.get(id(ch))
        if row is None:
            row = np.full(len(alphabet), np.nan)
            row[[alphabet[lab] for lab in ch.outputs]] = ch.llr(clip)
            cache[id(ch)] = row
        table[i] = row
    try:
        codes = np.array([alphabet[s] for s in y.ravel()], dtype=np.intp).reshape(y.shape)
    except KeyError as exc:
        raise ValueError(f"received symbol {exc.args[0]!r} is not an output of any leaf") from None
    llr = table[np.arange(N), codes]
    if np.isnan(llr).any():
        raise ValueError("received a symbol outside the alphabet of its leaf")
    return llr


def decode_llrs(llr, part: IndexPartition, state: SessionState, t: int,
                clip: float = LLR_CLIP) -> np.ndarray:
    """SC decisions for one block from precomputed channel LLRs."""
    if t != len(state.u):
        raise ValueError(f"blocks must be decoded in order; expected block {len(state.u)}")
    llr = np.asarray(llr, dtype=float)
    single = llr.ndim == 1
    llr2 = np.atleast_2d(llr)
    B, N = llr2.shape
    if N != part.N:
        raise ValueError(f"LLR vector has length {N}, partition expects {part.N}")
    known = np.zeros(N, dtype=bool)
    values = np.zeros((B, N), dtype=np.uint8)
    known[_sorted(part.frozen)] = True
    if part.chained:
        pos = _sorted(part.chained)
        known[pos] = True
        values[:, pos] = np.broadcast_to(_chained_values(part, state, t), (B, len(pos)))
    u_hat = sc_decode(llr2, known, values, clip=clip)
    if single:
        u_hat = u_hat[0]
    state.u.append(u_hat)
    state.relay.append(u_hat[..., _sorted(part.relay)])
    return u_hat


def sc_decode_block(y, part: IndexPartition, leaves, state: SessionState, t: int,
                    clip: float = LLR_CLIP) -> np.ndarray:
    """Decode block ``t`` from received symbols over Bob's equivalent leaves.

    Frozen positions decode to 0 and chained positions to the pre-shared or
    previously decoded relay bits; the rest follow the SC decisions, ties
    resolving to 0.
    """
    return decode_llrs(leaf_llrs(leaves, y, clip), part, state, t, clip)


def extract_message(u, part: IndexPartition) -> np.ndarray:
    return np.asarray(u)[..., _sorted(part.message)]


# --------------------------------------------------------------------------
# symbol text format

def format_symbols(v) -> str:
    """Whitespace-separated tokens, e.g. ``'0 ? 1 0'``."""
    return " ".join(str(s) for s in np.asarray(v, dtype=object).ravel())


def parse_symbols(text: str) -> list:
    out = []
    for tok in text.split():
        out.append(int(tok) if tok in ("0", "1") else tok)
    return out


# --------------------------------------------------------------------------
# end-to-end setup

def _auto_method(*arrays) -> str:
    for arr in arrays:
        if any(erasure_probability(ch) is None for ch in arr):
            return "merge"
    return "bec_exact"


def build_session(W: DiscreteChannel, W_tilde: DiscreteChannel, adversary: AdversarySpec, *,
                  beta: float = 0.3, method: str = "auto", mu: int = 128, mc_trials: int = 10_000,
                  master_seed: int = 0, preshared_seed: int = 1,
                  threads: int | None = None) -> SessionConfig:
    """Construct both parties' per-block code from the adversary spec."""
    N = adversary.N
    parts, main_z, leaves_all, mains, taps = [], [], [], [], []
    for t in range(adversary.T):
        main_eq = equivalent_main(W, adversary, t)
        tap_eq = equivalent_wiretap(W_tilde, adversary, t)
        m = _auto_method(main_eq, tap_eq) if method == "auto" else method
        opts = dict(mu=mu, trials=mc_trials, seed=master_seed + t, threads=threads)
        mp = construct(main_eq, m, **opts)
        wp = construct(tap_eq, m, **opts)
        low = polarized_sets(mp, beta).low
        high = polarized_sets(wp, beta).high
        parts.append(partition(low, high, N))
        main_z.append(mp.z)
        leaves_all.append(main_eq)
        mains.append(mp)
        taps.append(wp)
    parts = with_relays(parts, chain_plan(parts, main_z))
    return SessionConfig(N=N, partitions=parts, master_seed=master_seed,
                         preshared_seed=preshared_seed, main_leaves=tuple(leaves_all),
                         main_params=tuple(mains), wiretap_params=tuple(taps))
