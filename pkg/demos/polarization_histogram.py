"""Watch a random erasure profile polarize.

Draws N erasure probabilities uniformly, runs the closed-form recursion and
prints a text histogram of the synthetic-channel capacities. Mass piles up
near 0 and 1 while the middle thins out slowly as N grows.

    python demos/polarization_histogram.py 1024 7
"""

import sys

import numpy as np

from irregpolar import bec_recursion


def main(N=1024, seed=7, bins=20, width=60):
    eps = np.random.default_rng(seed).uniform(size=N)
    params = bec_recursion(eps)
    counts, edges = np.histogram(params.i_cap, bins=bins, range=(0.0, 1.0))
    scale = width / counts.max()
    print(f"N={N}, mean leaf capacity {np.mean(1 - eps):.4f}")
    for c, lo, hi in zip(counts, edges, edges[1:]):
        print(f"[{lo:4.2f}, {hi:4.2f})  {'#' * int(round(c * scale)):<{width}} {c}")
    for n in (8, 10, 12, 14):
        i = bec_recursion(np.random.default_rng(seed).uniform(size=2 ** n)).i_cap
        middle = np.mean((i >= 0.01) & (i <= 0.99))
        print(f"N=2^{n}: fraction with 0.01 <= I <= 0.99 is {middle:.3f}")


if __name__ == "__main__":
    main(*map(int, sys.argv[1:3]))
