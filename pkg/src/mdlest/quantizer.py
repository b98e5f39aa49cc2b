"""Finite reproduction-level grids and scalar quantization.

Estimation is always performed over a finite grid of real levels. The
data-independent grid grows with the input length (wider range, finer step);
the adaptive variant re-optimizes level values against the measurements while
symbol assignments stay fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import channel as channel_mod
from .validation import as_int_vector, as_vector

FIXED = "fixed"
ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class QuantGrid:
    """Strictly increasing, finite list of reproduction levels.

    kind "fixed" marks the data-independent construction of
    :func:`build_fixed_grid`; "adaptive" grids may be re-optimized by
    :func:`adapt_levels`. Immutable after construction.
    """

    levels: np.ndarray
    kind: str = ADAPTIVE

    def __post_init__(self):
        levels = as_vector(self.levels, "levels")
        if levels.size > 1 and not np.all(np.diff(levels) > 0):
            raise ValueError("levels must be strictly increasing")
        if self.kind not in (FIXED, ADAPTIVE):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        levels = levels.copy()
        levels.flags.writeable = False
        object.__setattr__(self, "levels", levels)

    def __len__(self) -> int:
        return int(self.levels.shape[0])

    @property
    def n_levels(self) -> int:
        return len(self)


def grid_half_width(n: int, log_base: Optional[float] = None) -> int:
    """Integer scale of the fixed grid: ceil(log(n)), natural log by default."""
    if n < 2:
        raise ValueError(f"sequence length must be at least 2, got {n}")
    if log_base is None:
        return int(math.ceil(math.log(n)))
    if log_base <= 1.0:
        raise ValueError("log_base must exceed 1")
    return int(math.ceil(math.log(n) / math.log(log_base)))


def build_fixed_grid(n: int, log_base: Optional[float] = None) -> QuantGrid:
    """Data-independent grid for a length-n input.

    With g = ceil(log(n)) the grid holds 2*g**2 + 1 levels (i - g**2)/g for
    i = 0..2*g**2: range [-g, +g], uniform step 1/g, symmetric about zero.
    Longer inputs get both a broader range and a finer resolution.
    """
    g = grid_half_width(int(n), log_base)
    size = 2 * g * g + 1
    levels = (np.arange(size, dtype=np.float64) - g * g) / g
    return QuantGrid(levels=levels, kind=FIXED)


def build_uniform_grid(half_range: float, n_levels: int) -> QuantGrid:
    """Adaptive grid of n_levels uniform levels on [-half_range, half_range].

    The usual starting point for quantizer adaptation: an odd n_levels puts a
    level exactly at zero.
    """
    if n_levels < 2:
        raise ValueError("n_levels must be at least 2")
    if not (half_range > 0 and math.isfinite(half_range)):
        raise ValueError("half_range must be positive and finite")
    return QuantGrid(levels=np.linspace(-half_range, half_range, int(n_levels)), kind=ADAPTIVE)


def quantize(x, grid: QuantGrid) -> np.ndarray:
    """Indices of the grid levels nearest to each entry of x.

    Ties at cell midpoints break to the lower index; out-of-range values
    clamp to the extreme levels. Total function: never raises on finite x.
    """
    x = as_vector(x, "x")
    levels = grid.levels
    if len(grid) == 1:
        return np.zeros(x.shape[0], dtype=np.int64)
    mids = (levels[:-1] + levels[1:]) / 2.0
    return np.searchsorted(mids, x, side="left").astype(np.int64)


def dequantize(symbols, grid: QuantGrid) -> np.ndarray:
    """Map grid indices back to their level values."""
    symbols = as_int_vector(symbols, "symbols")
    if symbols.min() < 0 or symbols.max() >= len(grid):
        raise ValueError("symbol index out of range for this grid")
    return grid.levels[symbols]


def save_grid(grid: QuantGrid, path) -> None:
    """Write levels as plain text, one value per line, exact round trip."""
    with open(path, "w") as fh:
        for v in grid.levels:
            fh.write(f"{v:.17g}\n")


def load_grid(path, kind: str = ADAPTIVE) -> QuantGrid:
    levels = np.loadtxt(path, dtype=np.float64, ndmin=1)
    return QuantGrid(levels=levels, kind=kind)


def _golden_section(f, lo: float, hi: float, tol: float) -> float:
    """Minimize a 1-D function on [lo, hi] to the given bracket tolerance."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def adapt_levels(
    symbols,
    ch: channel_mod.ChannelModel,
    grid: QuantGrid,
    merge_tol: float = 1e-12,
    search_tol: float = 1e-9,
) -> tuple[QuantGrid, np.ndarray]:
    """Re-optimize each level value holding symbol assignments fixed.

    Coordinate descent over levels: with Gaussian noise and a linear operator
    each 1-D subproblem has the closed-form least-squares solution, otherwise
    a golden-section search is used and a move is kept only if it improves the
    fit. The coding-length term depends on assignments alone, so the total
    energy never increases. Levels are re-sorted and duplicates closer than
    merge_tol merge, which may shrink the grid.

    Returns (new grid, remap) where remap[old_index] gives each symbol's index
    in the new grid.
    """
    if grid.kind == FIXED:
        raise ValueError("the fixed grid is data-independent; adaptation requires an adaptive grid")
    symbols = as_int_vector(symbols, "symbols")
    if symbols.min() < 0 or symbols.max() >= len(grid):
        raise ValueError("symbol index out of range for this grid")
    if symbols.shape[0] != ch.n:
        raise ValueError("symbols length does not match the channel input length")

    levels = grid.levels.copy()
    op = ch.operator
    x_hat = levels[symbols]

    if op.kind == channel_mod.CALLABLE:
        span = levels[-1] - levels[0] if len(grid) > 1 else max(1.0, abs(levels[0]))
        for k in range(levels.shape[0]):
            mask = symbols == k
            if not mask.any():
                continue

            def fit_cost(c, mask=mask):
                x_try = x_hat.copy()
                x_try[mask] = c
                r = ch.y - channel_mod.apply_operator(op, x_try)
                return float(r @ r)

            current = fit_cost(levels[k])
            cand = _golden_section(fit_cost, levels[k] - span, levels[k] + span, search_tol)
            if fit_cost(cand) < current:
                levels[k] = cand
                x_hat[mask] = cand
    else:
        r = ch.y - channel_mod.apply_operator(op, x_hat)
        for k in range(levels.shape[0]):
            mask = symbols == k
            if not mask.any():
                continue
            if op.kind == channel_mod.IDENTITY:
                shift = float(r[mask].mean())
                levels[k] += shift
                r[mask] -= shift
            else:
                g = op.matrix[:, mask].sum(axis=1)
                gg = float(g @ g)
                if gg <= 0.0:
                    continue
                shift = float(g @ r) / gg
                levels[k] += shift
                r -= shift * g

    # restore ordering, then merge levels that collapsed onto each other
    order = np.argsort(levels, kind="stable")
    sorted_levels = levels[order]
    merged: list[float] = []
    pos_of_sorted = np.empty(levels.shape[0], dtype=np.int64)
    for rank, v in enumerate(sorted_levels):
        if merged and v - merged[-1] < merge_tol:
            pos_of_sorted[rank] = len(merged) - 1
        else:
            pos_of_sorted[rank] = len(merged)
            merged.append(float(v))
    remap = np.empty(levels.shape[0], dtype=np.int64)
    remap[order] = pos_of_sorted
    new_grid = QuantGrid(levels=np.asarray(merged), kind=ADAPTIVE)
    return new_grid, remap
