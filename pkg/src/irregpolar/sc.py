"""Batched LLR-domain successive-cancellation recursion.

The input LLRs are indexed by physical codeword position.  Bit-reversing
them turns ``G_N = R F^{(x)n}`` into the plain ``F^{(x)n}`` butterfly, which
the tree recursion below decodes in natural order ``u_0, u_1, ...``.  The
LLR computed at leaf ``i`` is the exact log-likelihood ratio of the
synthesized channel ``W_N^{(i)}`` given the outputs and the earlier bits.
"""

from __future__ import annotations

import numpy as np

from .transform import bit_reversal, log2_length


def boxplus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``2 atanh(tanh(a/2) tanh(b/2))`` in a form that does not overflow."""
    return (np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
            + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b))))


def sc_decode(llr, known, known_values=None, clip: float = 40.0, record: bool = False):
    """Run SC over a batch.

    Parameters
    ----------
    llr : ndarray, shape (B, N)
        Channel LLRs ``ln P(y|0)/P(y|1)`` per physical position.
    known : ndarray of bool, shape (N,)
        Positions whose value is supplied instead of decided.
    known_values : ndarray, shape (B, N), optional
        Values for the known positions (other entries ignored).
    clip : float
        Saturation applied to the channel LLRs and to every intermediate.
    record : bool
        Also return the decision LLR of every position.

    Returns
    -------
    u_hat : ndarray of uint8, shape (B, N)
    llrs : ndarray, shape (B, N)
        Only when ``record`` is set.
    """
    llr = np.atleast_2d(np.asarray(llr, dtype=float))
    B, N = llr.shape
    log2_length(N)
    known = np.asarray(known, dtype=bool)
    if known.shape != (N,):
        raise ValueError("known mask must have one entry per position")
    if known.any():
        if known_values is None:
            raise ValueError("known_values required when some positions are known")
        kv = np.broadcast_to(np.asarray(known_values, dtype=np.uint8), (B, N))
    else:
        kv = None
    u_hat = np.zeros((B, N), dtype=np.uint8)
    rec = np.zeros((B, N)) if record else None
    L0 = np.clip(llr[:, bit_reversal(N)], -clip, clip)

    def node(L, lo):
        n = L.shape[1]
        if n == 1:
            if rec is not None:
                rec[:, lo] = L[:, 0]
            if known[lo]:
                bit = kv[:, lo]
            else:
                bit = (L[:, 0] < 0).astype(np.uint8)
            u_hat[:, lo] = bit
            return bit[:, None]
        h = n // 2
        a, b = L[:, :h], L[:, h:]
        left = node(np.clip(boxplus(a, b), -clip, clip), lo)
        g = np.where(left == 1, -a, a) + b
        right = node(np.clip(g, -clip, clip), lo + h)
        return np.concatenate([left ^ right, right], axis=1)

    node(L0, 0)
    if record:
        return u_hat, rec
    return u_hat
