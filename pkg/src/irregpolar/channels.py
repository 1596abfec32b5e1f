"""Binary-input discrete memoryless channels.

A channel is stored as two probability rows over a finite, ordered output
alphabet: ``p0[k] = P(outputs[k] | 0)`` and ``p1[k] = P(outputs[k] | 1)``.
Output labels are arbitrary hashable tokens; synthesized channels with large
product alphabets leave them implicit (``0 .. M-1``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ERASURE = "?"

_SUM_TOL = 1e-12


class AlphabetMismatchError(ValueError):
    """Raised when two channels cannot be composed."""


class DiscreteChannel:
    """Immutable binary-input channel with explicit transition probabilities.

    Parameters
    ----------
    p0, p1 : array_like
        Output distributions given input 0 and input 1.
    outputs : sequence, optional
        Output labels, one per column.  ``None`` means the implicit labels
        ``0 .. M-1``.
    """

    __slots__ = ("_p", "_outputs", "_index")

    def __init__(self, p0, p1, outputs=None):
        p = np.array([np.asarray(p0, dtype=float), np.asarray(p1, dtype=float)])
        if p.ndim != 2 or p.shape[1] == 0:
            raise ValueError("p0 and p1 must be non-empty 1-D rows of equal length")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValueError("transition probabilities must be finite and non-negative")
        sums = p.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > _SUM_TOL):
            raise ValueError(f"rows must sum to 1 (got {sums[0]!r}, {sums[1]!r})")
        if outputs is not None:
            outputs = tuple(outputs)
            if len(outputs) != p.shape[1]:
                raise ValueError(f"{len(outputs)} labels for {p.shape[1]} outputs")
            if len(set(outputs)) != len(outputs):
                raise ValueError("duplicate output labels")
        p.setflags(write=False)
        self._p = p
        self._outputs = outputs
        self._index = None

    @property
    def p(self) -> np.ndarray:
        """Transition matrix, shape ``(2, M)``."""
        return self._p

    @property
    def p0(self) -> np.ndarray:
        return self._p[0]

    @property
    def p1(self) -> np.ndarray:
        return self._p[1]

    @property
    def size(self) -> int:
        return self._p.shape[1]

    @property
    def outputs(self) -> tuple:
        if self._outputs is None:
            return tuple(range(self.size))
        return self._outputs

    @property
    def has_labels(self) -> bool:
        return self._outputs is not None

    def index(self, label) -> int:
        """Column index of an output label."""
        if self._index is None:
            self._index = {lab: k for k, lab in enumerate(self.outputs)}
        return self._index[label]

    def prob(self, y, x: int) -> float:
        """``P(y | x)`` by label; unknown labels have probability 0."""
        if self._index is None:
            self._index = {lab: k for k, lab in enumerate(self.outputs)}
        k = self._index.get(y)
        return 0.0 if k is None else float(self._p[x, k])

    def llr(self, clip: float | None = None) -> np.ndarray:
        """Per-output log-likelihood ratio ``ln(P(y|0) / P(y|1))``.

        Outputs with zero probability under both inputs get 0.
        """
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(self.p0) - np.log(self.p1)
        out[(self.p0 == 0) & (self.p1 == 0)] = 0.0
        if clip is not None:
            out = np.clip(out, -clip, clip)
        return out

    def relabel(self, outputs) -> "DiscreteChannel":
        return DiscreteChannel(self.p0, self.p1, outputs)

    def allclose(self, other: "DiscreteChannel", atol: float = 1e-12) -> bool:
        return (
            self.outputs == other.outputs
            and self.size == other.size
            and bool(np.allclose(self._p, other._p, rtol=0.0, atol=atol))
        )

    def __repr__(self) -> str:
        if self.size <= 6:
            return (f"{type(self).__name__}(outputs={self.outputs!r}, "
                    f"p0={self.p0.tolist()!r}, p1={self.p1.tolist()!r})")
        return f"{type(self).__name__}(<{self.size} outputs>)"


class ErasureChannel(DiscreteChannel):
    """Binary erasure channel with outputs ``(0, 1, '?')``."""

    __slots__ = ("eps",)

    def __init__(self, eps: float):
        eps = float(eps)
        if not 0.0 <= eps <= 1.0:
            raise ValueError(f"erasure probability must lie in [0, 1], got {eps}")
        super().__init__([1.0 - eps, 0.0, eps], [0.0, 1.0 - eps, eps], (0, 1, ERASURE))
        self.eps = eps

    def __repr__(self) -> str:
        return f"ErasureChannel(eps={self.eps!r})"


def bsc(p: float) -> DiscreteChannel:
    """Binary symmetric channel with crossover probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"crossover probability must lie in [0, 1], got {p}")
    return DiscreteChannel([1.0 - p, p], [p, 1.0 - p], (0, 1))


def degenerate_bec(kind: str) -> ErasureChannel:
    """The noiseless (``'eps0'``) or fully erasing (``'eps1'``) BEC."""
    if kind == "eps0":
        return ErasureChannel(0.0)
    if kind == "eps1":
        return ErasureChannel(1.0)
    raise ValueError(f"kind must be 'eps0' or 'eps1', got {kind!r}")


@dataclass(frozen=True)
class ChannelStats:
    capacity: float
    bhatta: float


def bhattacharyya(ch: DiscreteChannel) -> float:
    """``sum_y sqrt(P(y|0) P(y|1))``."""
    return float(min(1.0, np.sqrt(ch.p0 * ch.p1).sum()))


def capacity(ch: DiscreteChannel) -> float:
    """Mutual information in bits between a uniform input and the output."""
    return float(min(1.0, max(0.0, _capacity_terms(ch.p).sum())))


def _capacity_terms(p: np.ndarray) -> np.ndarray:
    # per-output contribution to I(X;Y), 0 log 0 := 0
    q = 0.5 * (p[0] + p[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        t = 0.5 * p * np.log2(p / q)
    t[p == 0] = 0.0
    return t.sum(axis=0)


def stats(ch: DiscreteChannel) -> ChannelStats:
    return ChannelStats(capacity(ch), bhattacharyya(ch))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def erasure_probability(ch: DiscreteChannel, tol: float = 1e-12) -> float | None:
    """Return ``eps`` if ``ch`` is equivalent to a BEC, else ``None``.

    A channel is BEC-equivalent when each output is either seen under one
    input only or equally likely under both.
    """
    p0, p1 = ch.p0, ch.p1
    one_sided = np.minimum(p0, p1) <= tol
    ambiguous = np.abs(p0 - p1) <= tol
    if not np.all(one_sided | ambiguous):
        return None
    mask = ambiguous & ~one_sided
    eps = float(0.5 * (p0[mask].sum() + p1[mask].sum()))
    return min(1.0, max(0.0, eps))


def _bec_expansion_eps(ch: DiscreteChannel) -> float | None:
    if isinstance(ch, ErasureChannel):
        return ch.eps
    if ch.outputs != (0, 1, ERASURE):
        return None
    e = ch.p0[2]
    ref = np.array([[1 - e, 0.0, e], [0.0, 1 - e, e]])
    return float(e) if np.allclose(ch.p, ref, rtol=0, atol=_SUM_TOL) else None


def cascade(a: DiscreteChannel, b: DiscreteChannel) -> DiscreteChannel:
    """Feed the output of ``a`` into ``b``.

    An erasure channel ``b`` acts symbol-wise on any alphabet: it forwards
    ``a``'s symbol with probability ``1 - eps`` and emits ``'?'`` otherwise.
    Any other ``b`` needs every symbol ``a`` can emit to be a bit.
    """
    eps = _bec_expansion_eps(b)
    if eps is not None:
        outputs = list(a.outputs)
        p = (1.0 - eps) * a.p
        if ERASURE in outputs:
            k = outputs.index(ERASURE)
            p[:, k] += eps
        elif eps > 0.0:
            outputs.append(ERASURE)
            p = np.concatenate([p, np.full((2, 1), eps)], axis=1)
        return DiscreteChannel(p[0], p[1], outputs if a.has_labels or ERASURE in outputs else None)

    cols = []
    for k, lab in enumerate(a.outputs):
        if np.all(a.p[:, k] == 0):
            continue
        if isinstance(lab, (bool, np.bool_)) or lab not in (0, 1):
            raise AlphabetMismatchError(
                f"output {lab!r} of the first channel is not a valid input of the second")
        cols.append((k, int(lab)))
    p = np.zeros((2, b.size))
    for k, v in cols:
        p += np.outer(a.p[:, k], b.p[v])
    return DiscreteChannel(p[0], p[1], b.outputs if b.has_labels else None)


def sample(ch: DiscreteChannel, x: np.ndarray, rng: np.random.Generator | None = None,
           uniforms: np.ndarray | None = None) -> np.ndarray:
    """Draw output column indices for input bits ``x`` (any shape).

    Pass either a generator or pre-drawn uniforms in ``[0, 1)`` shaped
    like ``x`` (inverse-CDF sampling).
    """
    x = np.asarray(x)
    u = rng.random(x.shape) if uniforms is None else np.asarray(uniforms)
    out = np.empty(x.shape, dtype=np.intp)
    for bit in (0, 1):
        row = ch.p[bit]
        cdf = np.cumsum(row)
        last = int(np.flatnonzero(row > 0)[-1])
        sel = x == bit
        out[sel] = np.minimum(np.searchsorted(cdf, u[sel], side="right"), last)
    return out
