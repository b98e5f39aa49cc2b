"""Measurement operators, Gaussian noise models, and incremental log-likelihoods.

A channel bundles the known operator applied to the unknown signal, the noise
density of the observations, and the observed measurement vector. The
log-likelihood can be evaluated in full or updated in O(M) (dense operator) or
O(1) (identity) when a single signal coordinate changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NumericError
from .validation import as_matrix, as_vector, check_positive

LOG2E = math.log2(math.e)

IDENTITY = "identity"
MATRIX = "matrix"
CALLABLE = "callable"


@dataclass(frozen=True)
class SystemOperator:
    """Known measurement operator w = J(x).

    kind is one of "identity", "matrix" (dense M x N), or "callable"
    (arbitrary user-supplied map with declared input/output lengths).
    """

    kind: str
    n_in: int
    n_out: int
    matrix: Optional[np.ndarray] = None
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.kind not in (IDENTITY, MATRIX, CALLABLE):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.n_in < 1 or self.n_out < 1:
            raise ValueError("operator dimensions must be positive")
        if self.kind == MATRIX:
            if self.matrix is None or self.matrix.shape != (self.n_out, self.n_in):
                raise ValueError("matrix operator requires a consistent M x N matrix")
        if self.kind == CALLABLE and self.func is None:
            raise ValueError("callable operator requires func")


def identity_operator(n: int) -> SystemOperator:
    return SystemOperator(kind=IDENTITY, n_in=int(n), n_out=int(n))


def matrix_operator(j) -> SystemOperator:
    j = as_matrix(j, "J")
    m, n = j.shape
    j = j.copy()
    j.flags.writeable = False
    return SystemOperator(kind=MATRIX, n_in=n, n_out=m, matrix=j)


def callable_operator(func: Callable[[np.ndarray], np.ndarray], n_in: int, n_out: int) -> SystemOperator:
    return SystemOperator(kind=CALLABLE, n_in=int(n_in), n_out=int(n_out), func=func)


@dataclass(frozen=True)
class GaussianNoise:
    """Additive white Gaussian observation noise with known variance."""

    sigma2: float

    def __post_init__(self):
        check_positive(self.sigma2, "sigma2")


@dataclass(frozen=True)
class ChannelModel:
    """Operator + noise law + the observed measurement vector."""

    operator: SystemOperator
    noise: GaussianNoise
    y: np.ndarray = field(repr=False)

    def __post_init__(self):
        y = as_vector(self.y, "y")
        if y.shape[0] != self.operator.n_out:
            raise ValueError(
                f"y has length {y.shape[0]} but the operator produces {self.operator.n_out} values"
            )
        y = y.copy()
        y.flags.writeable = False
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.operator.n_in

    @property
    def m(self) -> int:
        return self.operator.n_out


def gaussian_channel(y, sigma2: float, operator: SystemOperator | None = None) -> ChannelModel:
    """Convenience constructor; defaults to the identity operator."""
    y = as_vector(y, "y")
    if operator is None:
        operator = identity_operator(y.shape[0])
    return ChannelModel(operator=operator, noise=GaussianNoise(float(sigma2)), y=y)


def apply_operator(op: SystemOperator, x) -> np.ndarray:
    """Evaluate w = J(x)."""
    x = as_vector(x, "x")
    if x.shape[0] != op.n_in:
        raise ValueError(f"x has length {x.shape[0]}, operator expects {op.n_in}")
    if op.kind == IDENTITY:
        return x.copy()
    if op.kind == MATRIX:
        return op.matrix @ x
    w = np.asarray(op.func(x), dtype=np.float64)
    if w.shape != (op.n_out,):
        raise ValueError(f"callable operator returned shape {w.shape}, expected ({op.n_out},)")
    return w


def log_density_const(m: int, sigma2: float) -> float:
    """Coordinate-independent part of the Gaussian log density, in nats."""
    return -0.5 * m * math.log(2.0 * math.pi * sigma2)


def log_likelihood(ch: ChannelModel, x_hat) -> float:
    """log f(y | w = J(x_hat)) in nats for the channel's Gaussian noise."""
    w = apply_operator(ch.operator, x_hat)
    resid = ch.y - w
    sumsq = float(resid @ resid)
    ll = log_density_const(ch.m, ch.noise.sigma2) - sumsq / (2.0 * ch.noise.sigma2)
    if not math.isfinite(ll):
        raise NumericError("log-likelihood is not finite")
    return ll


@dataclass
class ResidualState:
    """Cached residual r = y - J(x_hat) plus its squared norm.

    Owned by a single annealing run. The cache drifts by at most a few ulps
    per update; callers refresh it once per sweep via refresh().
    """

    residual: np.ndarray
    sumsq: float
    n_updates: int = 0

    def log_likelihood(self, ch: ChannelModel) -> float:
        ll = log_density_const(ch.m, ch.noise.sigma2) - self.sumsq / (2.0 * ch.noise.sigma2)
        if not math.isfinite(ll):
            raise NumericError("log-likelihood is not finite")
        return ll


def residual_state(ch: ChannelModel, x_hat) -> ResidualState:
    """Build a fresh residual cache from scratch."""
    w = apply_operator(ch.operator, x_hat)
    r = ch.y - w
    return ResidualState(residual=r, sumsq=float(r @ r))


def residual_coeffs(ch: ChannelModel, state: ResidualState, coord: int) -> tuple[float, float]:
    """Linear response of ||r||^2 to coordinate `coord`.

    Returns (a, b) such that changing x[coord] by d changes ||r||^2 by
    d*(d*b - 2*a). Only defined for identity and matrix operators.
    """
    if not 0 <= coord < ch.n:
        raise ValueError(f"coordinate {coord} out of range for length {ch.n}")
    if ch.operator.kind == IDENTITY:
        return float(state.residual[coord]), 1.0
    if ch.operator.kind == MATRIX:
        col = ch.operator.matrix[:, coord]
        return float(col @ state.residual), float(col @ col)
    raise ValueError("incremental likelihood requires an identity or matrix operator")


def delta_log_likelihood(
    ch: ChannelModel, state: ResidualState, coord: int, old_value: float, new_value: float
) -> tuple[float, ResidualState]:
    """Update the cached residual for x[coord]: old_value -> new_value.

    Returns the new log-likelihood in nats along with the updated cache.
    Identical (to rounding) to rebuilding the residual from scratch.
    """
    a, b = residual_coeffs(ch, state, coord)
    d = float(new_value) - float(old_value)
    if d != 0.0:
        state.sumsq += d * (d * b - 2.0 * a)
        if ch.operator.kind == IDENTITY:
            state.residual[coord] -= d
        else:
            state.residual -= d * ch.operator.matrix[:, coord]
        state.n_updates += 1
    return state.log_likelihood(ch), state


def load_matrix(path) -> np.ndarray:
    """Read a dense operator from whitespace-separated rows of text."""
    arr = np.loadtxt(path, dtype=np.float64, ndmin=2)
    return arr


def save_matrix(j, path) -> None:
    np.savetxt(path, as_matrix(j), fmt="%.17g")


def load_vector(path) -> np.ndarray:
    return np.loadtxt(path, dtype=np.float64, ndmin=1)


def save_vector(x, path) -> None:
    np.savetxt(path, as_vector(x), fmt="%.17g")
