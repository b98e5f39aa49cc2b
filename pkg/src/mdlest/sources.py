"""Seeded synthetic generators for inputs, operators, and noise.

Everything here is a pure function of its spec and seed, so experiments can
be reproduced exactly from their config files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import SystemOperator, matrix_operator
from .validation import as_vector, check_positive, check_probability, rng_stream

BERNOULLI = "bernoulli-gaussian"
LAPLACE = "laplace"
TWO_STATE_MARKOV = "two-state-markov"

KINDS = (BERNOULLI, LAPLACE, TWO_STATE_MARKOV)


@dataclass(frozen=True)
class SourceSpec:
    """Declarative description of a synthetic source realization."""

    kind: str
    length: int
    seed: int
    p: float = 0.03  # nonzero probability (bernoulli-gaussian)
    amplitude: str = "pm1"  # "pm1" or "gaussian" spike amplitudes
    scale: float = 1.0  # laplace scale b
    transitions: tuple = (0.1, 0.1)  # (P(0->1), P(1->0))
    emissions: tuple = (-1.0, 1.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.length < 1:
            raise ValueError("length must be positive")
        if self.kind == BERNOULLI:
            check_probability(self.p, "p")
            if self.amplitude not in ("pm1", "gaussian"):
                raise ValueError(f"unknown amplitude law {self.amplitude!r}")
        if self.kind == LAPLACE:
            check_positive(self.scale, "scale")
        if self.kind == TWO_STATE_MARKOV:
            if len(self.transitions) != 2 or len(self.emissions) != 2:
                raise ValueError("two-state-markov needs two transition probabilities and two emission levels")
            check_probability(self.transitions[0], "transitions[0]")
            check_probability(self.transitions[1], "transitions[1]")


def generate(spec: SourceSpec) -> np.ndarray:
    """Draw one realization; deterministic given the spec's seed."""
    rng = rng_stream(spec.seed, 0)
    n = spec.length
    if spec.kind == BERNOULLI:
        mask = rng.random(n) < spec.p
        if spec.amplitude == "pm1":
            amps = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        else:
            amps = rng.standard_normal(n)
        return np.where(mask, amps, 0.0)
    if spec.kind == LAPLACE:
        return rng.laplace(0.0, spec.scale, n)
    # two-state Markov chain started from its stationary law
    p01, p10 = float(spec.transitions[0]), float(spec.transitions[1])
    e0, e1 = float(spec.emissions[0]), float(spec.emissions[1])
    total = p01 + p10
    pi1 = 0.5 if total == 0.0 else p01 / total
    states = np.empty(n, dtype=np.int64)
    state = 1 if rng.random() < pi1 else 0
    flips = rng.random(n)
    for i in range(n):
        states[i] = state
        if state == 0:
            if flips[i] < p01:
                state = 1
        else:
            if flips[i] < p10:
                state = 0
    return np.where(states == 1, e1, e0)


def gaussian_matrix(m: int, n: int, seed: int) -> SystemOperator:
    """Random measurement matrix with iid N(0, 1/m) entries.

    The 1/m variance keeps E||J x||^2 close to ||x||^2, so measurement SNR
    is on the same scale as signal SNR.
    """
    if m < 1 or n < 1:
        raise ValueError("matrix dimensions must be positive")
    rng = rng_stream(seed, 1)
    j = rng.normal(0.0, 1.0 / math.sqrt(m), size=(m, n))
    return matrix_operator(j)


def add_awgn(w, snr_db: float, seed: int) -> tuple[np.ndarray, float]:
    """Add white Gaussian noise at the requested measurement-domain SNR.

    The realized variance sigma2 = ||w||^2 / (M * 10^(snr_db/10)) is returned
    so the channel model can be matched exactly. An infinite SNR returns the
    input unchanged with sigma2 = 0.
    """
    w = as_vector(w, "w")
    if math.isinf(snr_db) and snr_db > 0:
        return w.copy(), 0.0
    power = float(w @ w)
    if power == 0.0:
        raise ValueError("cannot set a finite SNR for an all-zero signal")
    sigma2 = power / (w.shape[0] * 10.0 ** (snr_db / 10.0))
    rng = rng_stream(seed, 2)
    y = w + rng.normal(0.0, math.sqrt(sigma2), w.shape[0])
    return y, sigma2
