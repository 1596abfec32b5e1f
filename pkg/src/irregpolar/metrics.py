"""Monte-Carlo sessions, leakage and rate accounting, brute-force oracles."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .awtc import AdversarySpec, apply_rewrite, equivalent_main, equivalent_wiretap
from .channels import DiscreteChannel, sample
from .polarize import ChannelArray, SynthChannelParams
from .secure_code import (SessionConfig, SessionState, encode_block,
                          extract_message, preshared_bits, sc_decode_block)
from .transform import generator_matrix, log2_length

ORACLE_MAX_N = 8
ORACLE_MAX_OUTPUTS = 1 << 20
LEAKAGE_BUDGET = 1 << 26
_Z95 = 1.959963984540054


class BudgetError(ValueError):
    """An exact enumeration would exceed its size budget."""


def wilson_interval(k: int, n: int, z: float = _Z95) -> tuple[float, float]:
    if n <= 0:
        return 0.0, 1.0
    p = k / n
    den = 1 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, mid - half)
    hi = 1.0 if k == n else min(1.0, mid + half)
    return lo, hi


@dataclass
class SimReport:
    N: int
    T: int
    trials: int
    block_errors: int
    session_errors: int
    p_e: float
    p_e_low: float
    p_e_high: float
    leakage_bound: float | None
    secrecy_rate: float
    master_seed: int
    leakage_exact: float | None = None
    inputs: dict = field(default_factory=dict)
    runtime_s: float = 0.0

    CSV_FIELDS = ("N", "T", "trials", "block_errors", "session_errors", "p_e",
                  "p_e_low", "p_e_high", "leakage_bound", "leakage_exact",
                  "secrecy_rate", "master_seed")

    def csv_row(self) -> dict:
        """Deterministic fields plus echoed inputs; runtime is left out."""
        d = asdict(self)
        row = {k: d[k] for k in self.CSV_FIELDS}
        row.update(self.inputs)
        return row

    def summary(self) -> str:
        lines = [
            f"N={self.N} T={self.T} trials={self.trials} seed={self.master_seed}",
            f"session errors : {self.session_errors}  (P_e = {self.p_e:.4g}, "
            f"95% CI [{self.p_e_low:.4g}, {self.p_e_high:.4g}])",
            f"block errors   : {self.block_errors} of {self.trials * self.T}",
            f"leakage bound  : {self.leakage_bound!r} bits",
        ]
        if self.leakage_exact is not None:
            lines.append(f"leakage exact  : {self.leakage_exact!r} bits")
        lines += [f"secrecy rate   : {self.secrecy_rate:.6g} bits/use",
                  f"runtime        : {self.runtime_s:.2f} s"]
        return "\n".join(lines)


# --------------------------------------------------------------------------
# rates and leakage

def secrecy_rate(partitions, T: int | None = None, N: int | None = None) -> float:
    """Message bits per channel use over the whole session."""
    T = len(partitions) if T is None else T
    N = partitions[0].N if N is None else N
    return sum(p.n_message for p in partitions[:T]) / (T * N)


def leakage_upper_bound(wiretap_params, partitions, T: int | None = None) -> float:
    """Sum of Eve's synthesized capacities over the info and frozen indices.

    ``wiretap_params`` is one :class:`SynthChannelParams` per block, or a
    single one shared by all blocks.  Estimated constructions use
    ``sqrt(1 - Z**2)`` instead of their capacity figure.
    """
    T = len(partitions) if T is None else T
    if isinstance(wiretap_params, SynthChannelParams):
        wiretap_params = [wiretap_params] * T
    total = 0.0
    for t in range(T):
        params, part = wiretap_params[t], partitions[t]
        idx = np.array(sorted(part.info | part.frozen), dtype=np.intp)
        if idx.size == 0:
            continue
        if params.method in ("exact", "bec_exact"):
            vals = params.i_cap[idx]
        else:
            vals = np.sqrt(np.clip(1.0 - params.z[idx] ** 2, 0.0, 1.0))
        total += float(vals.sum())
    return total


def _all_inputs(N: int) -> np.ndarray:
    # row k holds the bits of k, u_0 most significant
    k = np.arange(1 << N)
    return ((k[:, None] >> (N - 1 - np.arange(N))) & 1).astype(np.uint8)


def _output_joint(leaves, x: np.ndarray) -> np.ndarray:
    # P(y | x) for every row of x over the product alphabet, y_0 most significant
    P = np.ones((x.shape[0], 1))
    for i, ch in enumerate(leaves):
        P = (P[:, :, None] * ch.p[x[:, i]][:, None, :]).reshape(x.shape[0], -1)
    return P


def leakage_exact_small(W_tilde: DiscreteChannel, adversary: AdversarySpec,
                        config: SessionConfig) -> float:
    """``I(M; Z)`` in bits by full enumeration, single block.

    Message, random and chained bits are uniform (Eve does not know the
    pre-shared bits); frozen bits are 0.
    """
    if config.T != 1 or adversary.T < 1:
        raise ValueError("exact leakage is defined here for single-block sessions")
    N = config.N
    if N > ORACLE_MAX_N:
        raise BudgetError(f"exact leakage limited to N <= {ORACLE_MAX_N}")
    part = config.partitions[0]
    leaves = equivalent_wiretap(W_tilde, adversary, 0)
    n_out = math.prod(ch.size for ch in leaves)
    if (1 << N) * n_out > LEAKAGE_BUDGET:
        raise BudgetError(f"enumeration of {(1 << N) * n_out} states exceeds {LEAKAGE_BUDGET}")
    msg = np.array(sorted(part.message), dtype=np.intp)
    if msg.size == 0:
        return 0.0
    frozen = np.array(sorted(part.frozen), dtype=np.intp)
    U = _all_inputs(N)
    U = U[~U[:, frozen].any(axis=1)] if frozen.size else U
    G = generator_matrix(N).astype(np.int64)
    X = ((U.astype(np.int64) @ G) & 1).astype(np.uint8)
    m_index = (U[:, msg].astype(np.int64) << np.arange(msg.size - 1, -1, -1)).sum(axis=1)
    n_msg = 1 << msg.size
    cond = np.zeros((n_msg, n_out))
    for m in range(n_msg):
        rows = np.flatnonzero(m_index == m)
        cond[m] = _output_joint(leaves, X[rows]).mean(axis=0)
    marg = cond.mean(axis=0)
    total = 0.0
    for m in range(n_msg):
        pos = cond[m] > 0
        total += float((cond[m, pos] * np.log2(cond[m, pos] / marg[pos])).sum())
    return max(0.0, total / n_msg)


def brute_force_synth(leaves, i: int) -> DiscreteChannel:
    """Synthesized channel ``i`` straight from ``W(y | u G_N)``.

    The output is the pair (received vector, earlier input bits); labels
    are ``(y_tuple, u_prefix_tuple)`` when the alphabet is small enough to
    list.
    """
    leaves = leaves if isinstance(leaves, ChannelArray) else ChannelArray(tuple(leaves))
    N = leaves.N
    log2_length(N)
    if N > ORACLE_MAX_N:
        raise BudgetError(f"brute-force oracle limited to N <= {ORACLE_MAX_N}")
    if not 0 <= i < N:
        raise IndexError(f"index {i} outside [0, {N})")
    n_out = math.prod(ch.size for ch in leaves)
    if n_out > ORACLE_MAX_OUTPUTS:
        raise BudgetError(f"{n_out} output vectors exceed {ORACLE_MAX_OUTPUTS}")
    U = _all_inputs(N)
    G = generator_matrix(N).astype(np.int64)
    X = ((U.astype(np.int64) @ G) & 1).astype(np.uint8)
    P = _output_joint(leaves, X)                       # (2^N, |Y|^N)
    S = P.reshape(1 << i, 2, 1 << (N - 1 - i), n_out).sum(axis=2) / 2.0 ** (N - 1)
    p0 = S[:, 0, :].ravel()
    p1 = S[:, 1, :].ravel()
    labels = None
    if (1 << i) * n_out <= 1 << 16:
        ys = _label_vectors(leaves)
        labels = [(y, tuple(int(b) for b in pre)) for pre in _all_inputs(i) for y in ys] if i else \
            [(y, ()) for y in ys]
    return DiscreteChannel(p0, p1, labels)


def _label_vectors(leaves) -> list:
    out = [()]
    for ch in leaves:
        out = [y + (lab,) for y in out for lab in ch.outputs]
    return out


# --------------------------------------------------------------------------
# Monte-Carlo sessions

def _trial_draws(config: SessionConfig, master_seed: int, trial: int):
    # one independent stream per trial; draw order is part of the contract
    rng = np.random.default_rng(np.random.SeedSequence([master_seed, trial]))
    draws = []
    for part in config.partitions:
        msg = rng.integers(0, 2, part.n_message, dtype=np.uint8)
        rnd = rng.integers(0, 2, len(part.random) + len(part.relay), dtype=np.uint8)
        noise = rng.random(config.N)
        draws.append((msg, rnd, noise))
    return draws


def _run_chunk(config, leaves_per_block, W, adversary, master_seed, trials):
    draws = [_trial_draws(config, master_seed, k) for k in trials]
    B = len(trials)
    pre = preshared_bits(config)
    tx = SessionState(preshared=np.broadcast_to(pre, (B, pre.size)))
    rx = SessionState(preshared=np.broadcast_to(pre, (B, pre.size)))
    labels = np.array(W.outputs + ("?",) if "?" not in W.outputs else W.outputs, dtype=object)
    session_bad = np.zeros(B, dtype=bool)
    block_errors = 0
    for t, part in enumerate(config.partitions):
        msg = np.stack([d[t][0] for d in draws])
        rnd = np.stack([d[t][1] for d in draws])
        noise = np.stack([d[t][2] for d in draws])
        x = encode_block(msg, part, tx, t, random_bits=rnd)
        v = labels[sample(W, x, uniforms=noise)]
        y = apply_rewrite(v, adversary, t)
        u_hat = sc_decode_block(y, part, leaves_per_block[t], rx, t)
        session_bad |= (extract_message(u_hat, part) != msg).any(axis=1)
        block_errors += int((u_hat != tx.u[t]).any(axis=1).sum())
    return int(session_bad.sum()), block_errors


def simulate_session(config: SessionConfig, adversary: AdversarySpec, W: DiscreteChannel,
                     W_tilde: DiscreteChannel, trials: int, master_seed: int | None = None,
                     threads: int | None = None, chunk: int = 250) -> SimReport:
    """Encode, transmit, rewrite and decode ``trials`` independent sessions.

    A session fails when any message bit of any block is decoded wrongly; a
    block fails when any of its ``u`` bits is.  Trial ``k`` draws everything
    from ``SeedSequence([master_seed, k])``, so the report does not depend
    on ``threads`` or ``chunk``.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if adversary.N != config.N or adversary.T < config.T:
        raise ValueError("adversary spec does not match the session (N or number of blocks)")
    seed = config.master_seed if master_seed is None else master_seed
    leaves = config.main_leaves or tuple(equivalent_main(W, adversary, t) for t in range(config.T))
    start = time.perf_counter()
    chunks = [range(a, min(a + chunk, trials)) for a in range(0, trials, chunk)]

    def job(ks):
        return _run_chunk(config, leaves, W, adversary, seed, list(ks))

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]
    sess = sum(p[0] for p in parts)
    blk = sum(p[1] for p in parts)
    lo, hi = wilson_interval(sess, trials)
    bound = (leakage_upper_bound(config.wiretap_params, config.partitions)
             if config.wiretap_params is not None else None)
    return SimReport(N=config.N, T=config.T, trials=trials, block_errors=blk,
                     session_errors=sess, p_e=sess / trials, p_e_low=lo, p_e_high=hi,
                     leakage_bound=bound, secrecy_rate=secrecy_rate(config.partitions),
                     master_seed=seed, runtime_s=time.perf_counter() - start)
