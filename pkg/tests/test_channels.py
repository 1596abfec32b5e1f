import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irregpolar.channels import (ERASURE, AlphabetMismatchError, DiscreteChannel,
                                 ErasureChannel, bhattacharyya, binary_entropy, bsc,
                                 capacity, cascade, degenerate_bec, erasure_probability,
                                 sample, stats)

from conftest import channels, probability


def test_bhattacharyya_examples():
    assert bhattacharyya(ErasureChannel(0.0)) == 0.0
    assert bhattacharyya(ErasureChannel(0.37)) == pytest.approx(0.37, abs=1e-15)
    assert bhattacharyya(bsc(0.1)) == pytest.approx(2 * math.sqrt(0.09), abs=1e-15)
    assert bhattacharyya(bsc(0.1)) == pytest.approx(0.6, abs=1e-12)


def test_capacity_examples():
    assert capacity(ErasureChannel(0.25)) == pytest.approx(0.75, abs=1e-15)
    assert capacity(ErasureChannel(1.0)) == 0.0
    assert capacity(bsc(0.11)) == pytest.approx(1 - binary_entropy(0.11), abs=1e-12)
    assert capacity(bsc(0.11)) == pytest.approx(0.5001, abs=1e-4)
    assert capacity(bsc(0.5)) == pytest.approx(0.0, abs=1e-15)


def test_degenerate_bec():
    assert degenerate_bec("eps0").eps == 0.0
    assert degenerate_bec("eps1").eps == 1.0
    assert capacity(degenerate_bec("eps1")) == 0.0
    with pytest.raises(ValueError):
        degenerate_bec("eps2")


def test_erasure_expansion_layout():
    ch = ErasureChannel(0.3)
    assert ch.outputs == (0, 1, ERASURE)
    np.testing.assert_allclose(ch.p, [[0.7, 0, 0.3], [0, 0.7, 0.3]])
    with pytest.raises(ValueError):
        ErasureChannel(1.2)


@pytest.mark.parametrize("p0,p1,outputs", [
    ([0.5, 0.4], [0.5, 0.5], None),          # row does not sum to 1
    ([1.2, -0.2], [0.5, 0.5], None),         # negative entry
    ([0.5, 0.5], [0.5, 0.5], ("a", "a")),    # duplicate labels
    ([0.5, 0.5], [0.5, 0.5], ("a",)),        # wrong label count
    ([0.5, 0.5], [1.0], None),               # ragged rows
])
def test_malformed_channels_rejected(p0, p1, outputs):
    with pytest.raises(ValueError):
        DiscreteChannel(p0, p1, outputs)


def test_channel_is_read_only():
    ch = bsc(0.2)
    with pytest.raises(ValueError):
        ch.p[0, 0] = 0.5


def test_cascade_identity_and_erasure():
    W = bsc(0.1)
    same = cascade(W, degenerate_bec("eps0"))
    assert same.allclose(W)
    gone = cascade(W, degenerate_bec("eps1"))
    assert capacity(gone) == 0.0
    assert gone.prob(ERASURE, 0) == 1.0 and gone.prob(ERASURE, 1) == 1.0


def test_cascade_of_erasures():
    ch = cascade(ErasureChannel(0.2), ErasureChannel(0.5))
    assert ch.outputs == (0, 1, ERASURE)
    assert ch.prob(ERASURE, 0) == pytest.approx(0.6, abs=1e-15)
    assert erasure_probability(ch) == pytest.approx(0.6, abs=1e-15)


def test_cascade_general_second_stage():
    # BSC after BSC is a BSC with crossover p(1-q) + q(1-p)
    ch = cascade(bsc(0.1), bsc(0.2))
    assert ch.prob(1, 0) == pytest.approx(0.1 * 0.8 + 0.2 * 0.9)


def test_cascade_alphabet_mismatch():
    with pytest.raises(AlphabetMismatchError):
        cascade(ErasureChannel(0.3), bsc(0.1))
    # a channel that never emits the erasure symbol is fine
    assert cascade(ErasureChannel(0.0), bsc(0.1)).allclose(bsc(0.1))


def test_erasure_probability_detection():
    assert erasure_probability(bsc(0.1)) is None
    assert erasure_probability(bsc(0.5)) == pytest.approx(1.0)
    relabeled = DiscreteChannel([0.2, 0.8, 0.0], [0.2, 0.0, 0.8], ("e", "a", "b"))
    assert erasure_probability(relabeled) == pytest.approx(0.2)


def test_sample_frequencies(rng):
    ch = DiscreteChannel([0.2, 0.3, 0.5], [0.6, 0.4, 0.0])
    for bit in (0, 1):
        y = sample(ch, np.full(200_000, bit), rng)
        freq = np.bincount(y, minlength=3) / y.size
        np.testing.assert_allclose(freq, ch.p[bit], atol=5e-3)
    assert not np.any(sample(ch, np.ones(10_000, dtype=int), rng) == 2)


def test_sample_with_given_uniforms():
    ch = bsc(0.25)
    u = np.array([0.0, 0.7499, 0.75, 0.9999])
    np.testing.assert_array_equal(sample(ch, np.zeros(4, dtype=int), uniforms=u), [0, 0, 1, 1])


@given(channels())
def test_bounds_between_z_and_capacity(ch):
    s = stats(ch)
    assert 0.0 <= s.bhatta <= 1.0
    assert 0.0 <= s.capacity <= 1.0 + 1e-12
    assert math.log2(2 / (1 + s.bhatta)) <= s.capacity + 1e-9
    assert s.capacity <= math.sqrt(max(0.0, 1 - s.bhatta ** 2)) + 1e-9


@given(channels(), st.randoms(use_true_random=False))
def test_invariant_under_output_permutation(ch, r):
    perm = list(range(ch.size))
    r.shuffle(perm)
    shuffled = DiscreteChannel(ch.p0[perm], ch.p1[perm])
    assert bhattacharyya(shuffled) == pytest.approx(bhattacharyya(ch), abs=1e-12)
    assert capacity(shuffled) == pytest.approx(capacity(ch), abs=1e-12)


@given(probability, probability, probability)
def test_cascade_associative_on_erasures(a, b, c):
    A, B, C = ErasureChannel(a), ErasureChannel(b), ErasureChannel(c)
    left = cascade(cascade(A, B), C)
    right = cascade(A, cascade(B, C))
    assert left.outputs == right.outputs
    np.testing.assert_allclose(left.p, right.p, rtol=0, atol=1e-12)


@settings(max_examples=200)
@given(channels(), channels(max_outputs=2))
def test_data_processing(a, b):
    if set(a.outputs) - {0, 1} and erasure_probability(b) is None:
        return
    try:
        ab = cascade(a, b)
    except AlphabetMismatchError:
        return
    assert capacity(ab) <= min(capacity(a), capacity(b)) + 1e-9
