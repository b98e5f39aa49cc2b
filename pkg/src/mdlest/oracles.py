"""Brute-force reference implementations for small instances.

Everything here is written directly from the defining formulas, with plain
Python counting and fsum accumulation, deliberately independent of the
incremental machinery it is used to check. Exhaustive enumeration is
exponential in the sequence length; keep n small.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter

import numpy as np

from .channel import ChannelModel, apply_operator
from .quantizer import QuantGrid

LOG2E = math.log2(math.e)


def entropy_bits_direct(symbols, q: int) -> float:
    """Per-symbol order-q conditional empirical entropy, circular contexts."""
    seq = [int(v) for v in symbols]
    n = len(seq)
    if not 0 <= q < n:
        raise ValueError("need 0 <= q < n")
    pair_counts: Counter = Counter()
    ctx_counts: Counter = Counter()
    for i in range(n):
        ctx = tuple(seq[(i - t) % n] for t in range(1, q + 1))
        pair_counts[(ctx, seq[i])] += 1
        ctx_counts[ctx] += 1
    terms = []
    for (ctx, _), m in pair_counts.items():
        terms.append(m * math.log2(m / ctx_counts[ctx]))
    return -math.fsum(terms) / n


def log_likelihood_direct(ch: ChannelModel, x_hat) -> float:
    """Gaussian log density evaluated entry by entry, in nats."""
    w = apply_operator(ch.operator, np.asarray(x_hat, dtype=np.float64))
    s2 = ch.noise.sigma2
    terms = []
    for yi, wi in zip(ch.y, w):
        terms.append(-0.5 * math.log(2.0 * math.pi * s2) - (yi - wi) ** 2 / (2.0 * s2))
    return math.fsum(terms)


def energy_bits_direct(symbols, grid: QuantGrid, ch: ChannelModel, q: int) -> float:
    """Total energy in bits: n * entropy + negative log-likelihood * log2(e)."""
    n = len(symbols)
    coding = n * entropy_bits_direct(symbols, q)
    ll = log_likelihood_direct(ch, grid.levels[np.asarray(symbols, dtype=np.int64)])
    return coding - ll * LOG2E


def all_sequences(n: int, n_levels: int):
    return itertools.product(range(n_levels), repeat=n)


def exhaustive_map(ch: ChannelModel, grid: QuantGrid, q: int):
    """Global minimizer of the energy over every grid sequence.

    Returns (symbols, energy_bits). Ties break on the lexicographically first
    sequence, matching the deterministic enumeration order.
    """
    best_seq = None
    best_energy = math.inf
    for seq in all_sequences(ch.n, len(grid)):
        e = energy_bits_direct(seq, grid, ch, q)
        if e < best_energy:
            best_energy = e
            best_seq = seq
    return np.asarray(best_seq, dtype=np.int64), best_energy


def exhaustive_posterior(ch: ChannelModel, grid: QuantGrid, q: int):
    """Exact posterior over all grid sequences under the 2^(-coding length) prior.

    Returns (sequences, probabilities, posterior mean of the dequantized
    signal). Probabilities are normalized with max-subtraction in log space.
    """
    seqs = list(all_sequences(ch.n, len(grid)))
    log_weights = np.array(
        [-energy_bits_direct(seq, grid, ch, q) * math.log(2.0) for seq in seqs]
    )
    log_weights -= log_weights.max()
    weights = np.exp(log_weights)
    probs = weights / math.fsum(weights.tolist())
    mean = np.zeros(ch.n, dtype=np.float64)
    for seq, p in zip(seqs, probs):
        mean += p * grid.levels[np.asarray(seq, dtype=np.int64)]
    return np.asarray(seqs, dtype=np.int64), probs, mean


def conditional_distribution_direct(symbols, position: int, grid: QuantGrid,
                                    ch: ChannelModel, q: int, s: float) -> np.ndarray:
    """Boltzmann conditional of one coordinate given the rest, by enumeration."""
    energies = []
    base = np.asarray(symbols, dtype=np.int64)
    for k in range(len(grid)):
        cand = base.copy()
        cand[position] = k
        energies.append(energy_bits_direct(cand, grid, ch, q))
    energies = np.asarray(energies)
    logw = -s * math.log(2.0) * energies
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def posterior_mean_direct(ch: ChannelModel, grid: QuantGrid, q: int) -> np.ndarray:
    return exhaustive_posterior(ch, grid, q)[2]
