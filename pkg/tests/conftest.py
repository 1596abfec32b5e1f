import numpy as np
import pytest
from hypothesis import strategies as st

from irregpolar.channels import DiscreteChannel, ErasureChannel, bsc


def random_table(rng, m=4):
    """A random binary-input channel with ``m`` outputs."""
    p = rng.dirichlet(np.ones(m), size=2)
    return DiscreteChannel(p[0], p[1])


def random_channel(rng):
    kind = rng.integers(3)
    if kind == 0:
        return ErasureChannel(rng.uniform())
    if kind == 1:
        return bsc(rng.uniform(0, 0.5))
    return random_table(rng)


probability = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def channels(draw, max_outputs=4):
    kind = draw(st.sampled_from(["bec", "bsc", "table"]))
    if kind == "bec":
        return ErasureChannel(draw(probability))
    if kind == "bsc":
        return bsc(draw(st.floats(0.0, 0.5)))
    m = draw(st.integers(2, max_outputs))
    w = draw(st.lists(st.lists(st.floats(0.01, 1.0), min_size=m, max_size=m), min_size=2, max_size=2))
    w = np.array(w)
    w /= w.sum(axis=1, keepdims=True)
    return DiscreteChannel(w[0], w[1])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[number])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
