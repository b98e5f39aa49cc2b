"""Reference algorithms: accelerated l1 recovery, entropy-coded scalar
quantization, and the rate-distortion function by alternating minimization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .validation import as_matrix, as_vector, check_positive


def soft_threshold(x, tau: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def lasso_objective(j, y, x, lam: float) -> float:
    r = y - j @ x
    return 0.5 * float(r @ r) + lam * float(np.abs(x).sum())


def power_iteration(j, max_iter: int = 500, tol: float = 1e-12) -> float:
    """Largest squared singular value of j (the gradient Lipschitz constant)."""
    j = as_matrix(j)
    v = np.ones(j.shape[1]) / math.sqrt(j.shape[1])
    prev = 0.0
    for _ in range(max_iter):
        w = j.T @ (j @ v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            raise ValueError("operator matrix is zero")
        v = w / norm
        if abs(norm - prev) <= tol * max(norm, 1.0):
            break
        prev = norm
    return norm


@dataclass
class FistaResult:
    x: np.ndarray
    objective: float
    n_iter: int
    objectives: np.ndarray


def fista(j, y, lam: float, max_iter: int = 1000, tol: float = 1e-8) -> FistaResult:
    """Minimize 0.5*||y - J x||^2 + lam*||x||_1 with restarted acceleration.

    The momentum is reset whenever the accelerated candidate would raise the
    objective and a plain proximal-gradient step is taken instead, so the
    recorded objective sequence is nonincreasing. Stops when the relative
    objective change drops below tol.
    """
    j = as_matrix(j, "J")
    y = as_vector(y, "y")
    if y.shape[0] != j.shape[0]:
        raise ValueError("y length does not match the number of matrix rows")
    lam = check_positive(lam, "lam")
    if not np.any(j):
        raise ValueError("operator matrix is zero")
    lip = power_iteration(j) * (1.0 + 1e-6)
    step = 1.0 / lip

    x = np.zeros(j.shape[1])
    x_prev = x.copy()
    t_mom = 1.0
    obj = lasso_objective(j, y, x, lam)
    objectives = [obj]
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        z = x + ((t_mom - 1.0) / (t_mom + 2.0)) * (x - x_prev) if t_mom > 1.0 else x
        grad = j.T @ (j @ z - y)
        cand = soft_threshold(z - step * grad, lam * step)
        cand_obj = lasso_objective(j, y, cand, lam)
        if cand_obj > obj:
            # restart: plain ISTA step from the current point is a descent step
            grad = j.T @ (j @ x - y)
            cand = soft_threshold(x - step * grad, lam * step)
            cand_obj = lasso_objective(j, y, cand, lam)
            t_mom = 1.0
        x_prev = x
        x = cand
        t_mom = (1.0 + math.sqrt(1.0 + 4.0 * t_mom * t_mom)) / 2.0
        change = obj - cand_obj
        obj = cand_obj
        objectives.append(obj)
        if change <= tol * max(abs(obj), 1.0) and n_iter > 1:
            break
    return FistaResult(x=x, objective=obj, n_iter=n_iter, objectives=np.asarray(objectives))


@dataclass(frozen=True)
class RDPoint:
    """One operating point: bits per symbol vs mean squared error per symbol."""

    rate: float
    distortion: float

    def __post_init__(self):
        if self.rate < 0 or self.distortion < 0:
            raise ValueError("rate and distortion must be nonnegative")


def entropy_bits(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def ecsq_rd_point(x, step: float) -> RDPoint:
    """Uniform midtread scalar quantizer followed by ideal entropy coding.

    Rate is the order-0 empirical entropy of the quantizer outputs in bits
    per symbol; distortion is the per-symbol squared error.
    """
    x = as_vector(x, "x")
    step = check_positive(step, "step")
    idx = np.rint(x / step)
    recon = idx * step
    _, counts = np.unique(idx, return_counts=True)
    rate = entropy_bits(counts)
    distortion = float(np.mean((x - recon) ** 2))
    return RDPoint(rate=rate, distortion=distortion)


def blahut_arimoto(
    pmf,
    distortion_matrix,
    slopes,
    tol: float = 1e-7,
    max_iter: int = 20000,
) -> list[RDPoint]:
    """Rate-distortion curve by alternating minimization.

    One point per entry of `slopes` (the magnitude of the RD slope in nats
    per distortion unit). Exponentials are row-shifted so arbitrarily steep
    slopes stay in range; iteration stops when the rate changes by less than
    tol bits.
    """
    p = as_vector(pmf, "pmf")
    if np.any(p < 0):
        raise ValueError("pmf must be nonnegative")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"pmf sums to {p.sum():.12g}, expected 1")
    d = as_matrix(distortion_matrix, "distortion_matrix")
    if d.shape[0] != p.shape[0]:
        raise ValueError("distortion matrix rows must match the pmf length")
    if np.any(d < 0):
        raise ValueError("distortion matrix must be nonnegative")

    log2e = math.log2(math.e)
    slopes = np.asarray(slopes, dtype=np.float64)
    if np.any(slopes < 0):
        raise ValueError("slopes must be nonnegative")
    row_min = d.min(axis=1)
    base = float(p @ row_min)
    shifted = d - row_min[:, None]

    # steepest slope first so each point warm-starts the next one
    order = np.argsort(-slopes, kind="stable")
    points: list[RDPoint | None] = [None] * slopes.shape[0]
    q = p.copy()
    for idx in order:
        beta = slopes[idx]
        k = np.exp(-beta * shifted)  # row shift keeps any slope in range
        kd = k * d
        rate_prev = math.inf
        rate = 0.0
        dist = 0.0
        for _ in range(max_iter):
            c = np.maximum(k @ q, 1e-300)  # per-source normalizers
            u = p / c
            dist = float(u @ (kd @ q))
            # I(X; Xhat): the reproduction-law logs telescope into the
            # normalizers, avoiding 0/0 at unsupported reproduction points
            rate = -beta * log2e * (dist - base) - float(p @ np.log2(c))
            q = q * (k.T @ u)
            if abs(rate - rate_prev) < tol:
                break
            rate_prev = rate
        points[idx] = RDPoint(rate=max(rate, 0.0), distortion=dist)
    return points


def laplace_pmf(n_bins: int = 1201, span: float = 12.0, scale: float = 1.0):
    """Discretized zero-mean Laplace density on [-span, span].

    Returns (grid, pmf) where the pmf holds the exact probability mass of
    each cell (CDF differences), renormalized over the truncated range. Use a
    span large enough that the truncated mass is negligible.
    """
    if n_bins < 3:
        raise ValueError("n_bins must be at least 3")
    b = check_positive(scale, "scale")
    grid = np.linspace(-span, span, n_bins)
    half = (grid[1] - grid[0]) / 2.0

    def cdf(v):
        v = np.asarray(v, dtype=np.float64)
        return np.where(v < 0, 0.5 * np.exp(v / b), 1.0 - 0.5 * np.exp(-v / b))

    pmf = cdf(grid + half) - cdf(grid - half)
    pmf /= pmf.sum()
    return grid, pmf


def squared_error_matrix(source_grid, repro_grid) -> np.ndarray:
    a = as_vector(source_grid, "source_grid")
    b = as_vector(repro_grid, "repro_grid")
    return (a[:, None] - b[None, :]) ** 2


def laplace_differential_entropy_bits(scale: float = 1.0) -> float:
    return math.log2(2.0 * math.e * check_positive(scale, "scale"))


def shannon_lower_bound_bits(distortion: float, diff_entropy_bits: float) -> float:
    """h(X) - 0.5*log2(2*pi*e*D), the squared-error Shannon lower bound."""
    d = check_positive(distortion, "distortion")
    return diff_entropy_bits - 0.5 * math.log2(2.0 * math.pi * math.e * d)
