"""Annealed Gibbs sampling over quantized grids, plus the estimators built on it.

The energy of a candidate symbol sequence is its total coding length in bits
plus the negative log-likelihood of the measurements converted to bits. The
Gibbs conditional for a coordinate weights every grid level by
exp(-s * ln2 * delta_bits): at s = 1 this samples the posterior induced by
the 2^(-coding length) prior, and increasing s anneals toward the minimum-
energy sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import channel as channel_mod
from ._engine import sweep_dense
from ._kernels import HAVE_NUMBA, sweep_dense_jit
from .channel import LOG2E, ChannelModel, ResidualState, residual_coeffs, residual_state
from .entropy import ContextCounts, DENSE_LIMIT, default_order
from .quantizer import ADAPTIVE, FIXED, QuantGrid, adapt_levels, build_fixed_grid, dequantize, quantize
from .validation import as_rng, rng_stream

LN2 = math.log(2.0)


@dataclass(frozen=True)
class EnergyTerms:
    """Coding-length and likelihood parts of the energy, both in bits."""

    coding_bits: float
    likelihood_bits: float

    @property
    def total_bits(self) -> float:
        return self.coding_bits + self.likelihood_bits


@dataclass(frozen=True)
class AnnealSchedule:
    """Inverse temperature ladder: sweeps_per_stage sweeps at each s, then s *= rho.

    The default starts warm (s0 < 1): a cold start traps small dense-operator
    instances in local minima that single-site moves cannot leave.
    """

    s0: float = 0.2
    rho: float = 1.15
    sweeps_per_stage: int = 2
    total_sweeps: int = 400

    def __post_init__(self):
        if not (self.s0 > 0 and math.isfinite(self.s0)):
            raise ValueError("s0 must be positive and finite")
        if not self.rho > 1.0:
            raise ValueError("rho must exceed 1 so that s strictly increases")
        if self.sweeps_per_stage < 1:
            raise ValueError("sweeps_per_stage must be at least 1")
        if self.total_sweeps < 0:
            raise ValueError("total_sweeps must be nonnegative")

    def s_at(self, sweep: int) -> float:
        return self.s0 * self.rho ** (sweep // self.sweeps_per_stage)


@dataclass
class SamplerConfig:
    """Knobs shared by the estimators; defaults are the library-wide ones."""

    q: Optional[int] = None
    schedule: AnnealSchedule = field(default_factory=AnnealSchedule)
    n_restarts: int = 3
    adaptive: bool = False
    adapt_every: int = 10
    burn_in: int = 50
    n_samples: int = 200
    engine: str = "auto"
    seed: int = 0
    grid_log_base: Optional[float] = None
    dense_limit: int = DENSE_LIMIT


@dataclass
class AnnealState:
    """Mutable sampler state: symbols live inside counts; caches stay consistent."""

    counts: ContextCounts
    residual: ResidualState
    x_hat: np.ndarray
    s: float
    rng: np.random.Generator

    @property
    def symbols(self) -> np.ndarray:
        return self.counts.symbols

    @property
    def n(self) -> int:
        return self.counts.n

    def refresh_residual(self, ch: ChannelModel) -> None:
        self.residual = residual_state(ch, self.x_hat)

    def energy_terms(self, ch: ChannelModel) -> EnergyTerms:
        coding = self.counts.coding_length_bits()
        neg_ll = self.residual.sumsq / (2.0 * ch.noise.sigma2) - channel_mod.log_density_const(
            ch.m, ch.noise.sigma2
        )
        return EnergyTerms(coding_bits=coding, likelihood_bits=neg_ll * LOG2E)

    def validate(self, ch: ChannelModel, grid: QuantGrid, rel_tol: float = 1e-6) -> None:
        """Assert caches match a from-scratch rebuild (test/debug helper)."""
        self.counts.validate()
        fresh = residual_state(ch, dequantize(self.symbols, grid))
        ref = max(abs(fresh.sumsq), 1.0)
        if abs(fresh.sumsq - self.residual.sumsq) > rel_tol * ref:
            raise AssertionError("cached residual drifted from recomputation")


def energy(symbols, grid: QuantGrid, counts: ContextCounts, ch: ChannelModel) -> EnergyTerms:
    """Energy of a sequence: coding length plus likelihood, in bits."""
    coding = counts.coding_length_bits()
    ll = channel_mod.log_likelihood(ch, dequantize(symbols, grid))
    return EnergyTerms(coding_bits=coding, likelihood_bits=-ll * LOG2E)


def initial_symbols(ch: ChannelModel, grid: QuantGrid) -> np.ndarray:
    """Cheap data-aware start: quantized measurements, or a matched-filter
    back-projection for matrix operators."""
    op = ch.operator
    if op.kind == channel_mod.IDENTITY:
        return quantize(ch.y, grid)
    if op.kind == channel_mod.MATRIX:
        colsq = np.einsum("ij,ij->j", op.matrix, op.matrix)
        back = op.matrix.T @ ch.y
        x0 = np.divide(back, colsq, out=np.zeros_like(back), where=colsq > 0)
        return quantize(x0, grid)
    return quantize(np.zeros(op.n_in), grid)


def init_state(
    ch: ChannelModel,
    grid: QuantGrid,
    symbols,
    q: int,
    rng,
    s: float = 1.0,
    dense_limit: int = DENSE_LIMIT,
) -> AnnealState:
    counts = ContextCounts(symbols, q, alphabet_size=len(grid), dense_limit=dense_limit)
    x_hat = dequantize(counts.symbols, grid)
    return AnnealState(counts=counts, residual=residual_state(ch, x_hat), x_hat=x_hat, s=float(s), rng=as_rng(rng))


@dataclass
class _BestTracker:
    var_energy: float
    symbols: np.ndarray
    x_hat: np.ndarray
    grid: QuantGrid


def _var_energy(state: AnnealState, like_scale: float) -> float:
    return state.counts.coding_length_bits() + state.residual.sumsq * like_scale


def _pick_engine(engine: str, state: AnnealState, ch: ChannelModel) -> str:
    dense_ok = state.counts.dense and ch.operator.kind in (channel_mod.IDENTITY, channel_mod.MATRIX)
    if engine == "auto":
        if dense_ok:
            return "numba" if HAVE_NUMBA else "python"
        return "general"
    if engine in ("numba", "python") and not dense_ok:
        raise ValueError(
            f"engine {engine!r} needs dense context counts and an identity or matrix operator"
        )
    if engine not in ("numba", "python", "general"):
        raise ValueError(f"unknown engine {engine!r}")
    return engine


def _draw_candidate(dbits: np.ndarray, s_beta: float, u: float, record: bool):
    # mirrors the selection code in _engine.sweep_dense, operation for operation
    n_levels = dbits.shape[0]
    mn = dbits[0]
    k_min = 0
    for k in range(1, n_levels):
        if dbits[k] < mn:
            mn = dbits[k]
            k_min = k
    wbuf = np.empty(n_levels, dtype=np.float64)
    tot = 0.0
    for k in range(n_levels):
        w = math.exp(-s_beta * (dbits[k] - mn))
        wbuf[k] = w
        tot += w
    probs = wbuf / tot if record else None
    uu = u * tot
    chosen = k_min
    acc = 0.0
    for k in range(n_levels):
        acc += wbuf[k]
        if uu < acc:
            chosen = k
            break
    return chosen, probs


def _sweep_general(state, grid, ch, order, uniforms, best, record):
    """Reference sweep: works with sparse counts and callable operators."""
    counts = state.counts
    levels = grid.levels
    n_levels = levels.shape[0]
    op = ch.operator
    like_scale = LOG2E / (2.0 * ch.noise.sigma2)
    s_beta = state.s * LN2
    is_callable = op.kind == channel_mod.CALLABLE
    probs_rows = []
    chosen_rows = []
    dbits = np.empty(n_levels, dtype=np.float64)
    for t in range(order.shape[0]):
        i = int(order[t])
        a_old = int(counts.symbols[i])
        v_old = levels[a_old]
        if not is_callable:
            adot, bsq = residual_coeffs(ch, state.residual, i)
        for k in range(n_levels):
            d_ent = 0.0 if k == a_old else counts.peek_delta(i, k)
            if is_callable:
                if k == a_old:
                    dres = 0.0
                else:
                    x_try = state.x_hat.copy()
                    x_try[i] = levels[k]
                    rr = ch.y - channel_mod.apply_operator(op, x_try)
                    dres = float(rr @ rr) - state.residual.sumsq
            else:
                d = levels[k] - v_old
                dres = d * (d * bsq - 2.0 * adot)
            dbits[k] = d_ent + dres * like_scale
        chosen, probs = _draw_candidate(dbits, s_beta, float(uniforms[t]), record)
        if record:
            probs_rows.append(probs)
            chosen_rows.append(chosen)
        if chosen != a_old:
            counts.apply(i, chosen)
            state.x_hat[i] = levels[chosen]
            if is_callable:
                rr = ch.y - channel_mod.apply_operator(op, state.x_hat)
                state.residual = ResidualState(residual=rr, sumsq=float(rr @ rr))
            else:
                d = levels[chosen] - v_old
                state.residual.sumsq += d * (d * bsq - 2.0 * adot)
                if op.kind == channel_mod.IDENTITY:
                    state.residual.residual[i] -= d
                else:
                    state.residual.residual -= d * op.matrix[:, i]
        var = _var_energy(state, like_scale)
        if var < best.var_energy:
            best.var_energy = var
            best.symbols[:] = counts.symbols
    return probs_rows, chosen_rows


def _run_sweep(state, grid, ch, engine, best, record=False):
    """One sweep through all coordinates; returns recorded conditionals or None.

    The residual cache is rebuilt from scratch at every sweep start (the once-
    per-N-updates refresh policy), so drift never accumulates across sweeps.
    """
    n = state.n
    order = state.rng.permutation(n).astype(np.int64)
    uniforms = state.rng.random(n)
    which = _pick_engine(engine, state, ch)
    state.refresh_residual(ch)

    if which == "general":
        probs_rows, chosen_rows = _sweep_general(state, grid, ch, order, uniforms, best, record)
        if record:
            return order, np.array(probs_rows), np.array(chosen_rows, dtype=np.int64)
        return None

    counts = state.counts
    counts._ensure_sums()
    sums = np.array(
        [
            counts._S[0] + counts._S[1],
            counts._T[0] + counts._T[1],
            state.residual.sumsq,
            best.var_energy,
        ],
        dtype=np.float64,
    )
    op = ch.operator
    if op.kind == channel_mod.IDENTITY:
        is_identity = True
        jt = np.zeros((0, 0), dtype=np.float64)
        colsq = np.zeros(0, dtype=np.float64)
    else:
        is_identity = False
        jt = state.__dict__.setdefault("_jt", np.ascontiguousarray(op.matrix.T))
        colsq = state.__dict__.setdefault("_colsq", np.einsum("ij,ij->j", op.matrix, op.matrix))
    like_scale = LOG2E / (2.0 * ch.noise.sigma2)
    s_beta = state.s * LN2
    if record:
        probs_out = np.empty((n, len(grid)), dtype=np.float64)
        chosen_out = np.empty(n, dtype=np.int64)
    else:
        probs_out = np.empty((0, 0), dtype=np.float64)
        chosen_out = np.empty(0, dtype=np.int64)
    fn = sweep_dense_jit if which == "numba" else sweep_dense
    fn(
        counts.symbols, counts.codes, counts.table, counts.totals, counts.powers,
        counts.nlogn, counts.order, grid.levels, is_identity, jt, colsq,
        state.residual.residual, like_scale, s_beta, order, uniforms, sums,
        best.symbols, record, probs_out, chosen_out,
    )
    counts.mark_stale()
    state.residual.sumsq = float(sums[2])
    state.x_hat = grid.levels[counts.symbols]
    best.var_energy = float(sums[3])
    return (order, probs_out, chosen_out) if record else None


def gibbs_sweep(state: AnnealState, grid: QuantGrid, ch: ChannelModel,
                engine: str = "auto", record_conditionals: bool = False):
    """Resample every coordinate once, in random order, from its exact
    Boltzmann conditional at the state's current inverse temperature.

    Returns the state; with record_conditionals=True returns
    (state, visit_order, conditional probabilities per visit, drawn levels).
    """
    throwaway = _BestTracker(
        var_energy=math.inf,
        symbols=np.empty(state.n, dtype=np.int64),
        x_hat=state.x_hat.copy(),
        grid=grid,
    )
    recorded = _run_sweep(state, grid, ch, engine, throwaway, record=record_conditionals)
    if record_conditionals:
        order, probs, chosen = recorded
        return state, order, probs, chosen
    return state


@dataclass
class AnnealResult:
    x_hat: np.ndarray
    symbols: np.ndarray
    grid: QuantGrid
    energy: EnergyTerms
    trace: np.ndarray  # columns: sweep, s, coding_bits, likelihood_bits, total_bits
    state: AnnealState


TRACE_COLUMNS = ("sweep", "s", "coding_bits", "likelihood_bits", "total_bits")


def write_trace_csv(trace: np.ndarray, path) -> None:
    """Dump an annealing energy trace as CSV."""
    with open(path, "w") as fh:
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        for row in np.atleast_2d(trace):
            fh.write(f"{int(row[0])},{row[1]:.9g},{row[2]:.9g},{row[3]:.9g},{row[4]:.9g}\n")


def anneal(
    state: AnnealState,
    schedule: AnnealSchedule,
    grid: QuantGrid,
    ch: ChannelModel,
    engine: str = "auto",
    adaptive: bool = False,
    adapt_every: int = 10,
) -> AnnealResult:
    """Run the annealing ladder and return the lowest-energy state ever visited.

    With adaptive=True the grid's level values are re-optimized every
    adapt_every sweeps (symbol assignments fixed), which can merge levels.
    """
    like_scale = LOG2E / (2.0 * ch.noise.sigma2)
    best = _BestTracker(
        var_energy=_var_energy(state, like_scale),
        symbols=state.symbols.copy(),
        x_hat=state.x_hat.copy(),
        grid=grid,
    )
    trace = np.zeros((schedule.total_sweeps, 5), dtype=np.float64)
    for sweep in range(schedule.total_sweeps):
        state.s = schedule.s_at(sweep)
        prev_best = best.var_energy
        _run_sweep(state, grid, ch, engine, best)
        if best.var_energy < prev_best:
            best.x_hat = grid.levels[best.symbols]
            best.grid = grid
        terms = state.energy_terms(ch)
        trace[sweep] = (sweep, state.s, terms.coding_bits, terms.likelihood_bits, terms.total_bits)
        if adaptive and adapt_every > 0 and (sweep + 1) % adapt_every == 0 and sweep + 1 < schedule.total_sweeps:
            new_grid, remap = adapt_levels(state.symbols, ch, grid)
            new_symbols = remap[state.symbols]
            grid = new_grid
            state.counts = ContextCounts(new_symbols, state.counts.order, alphabet_size=len(grid))
            state.x_hat = dequantize(new_symbols, grid)
            state.refresh_residual(ch)
            var = _var_energy(state, like_scale)
            if var < best.var_energy:
                best.var_energy = var
                best.symbols = state.symbols.copy()
                best.x_hat = state.x_hat.copy()
                best.grid = grid
    # exact energy of the best state, rebuilt from scratch
    best_counts = ContextCounts(best.symbols, state.counts.order, alphabet_size=len(best.grid))
    best_energy = energy(best.symbols, best.grid, best_counts, ch)
    return AnnealResult(
        x_hat=np.asarray(best.x_hat, dtype=np.float64).copy(),
        symbols=best.symbols.copy(),
        grid=best.grid,
        energy=best_energy,
        trace=trace,
        state=state,
    )


def _resolve_grid(ch: ChannelModel, grid, cfg: SamplerConfig) -> QuantGrid:
    if grid is None or (isinstance(grid, str) and grid == "auto"):
        grid = build_fixed_grid(ch.n, cfg.grid_log_base)
    if cfg.adaptive and grid.kind == FIXED:
        grid = QuantGrid(levels=grid.levels, kind=ADAPTIVE)
    return grid


def _resolve_order(ch: ChannelModel, grid: QuantGrid, cfg: SamplerConfig) -> int:
    return cfg.q if cfg.q is not None else default_order(ch.n, len(grid))


@dataclass
class MapEstimate:
    x_hat: np.ndarray
    symbols: np.ndarray
    grid: QuantGrid
    energy: EnergyTerms
    trace: np.ndarray
    restart_energies: list


def estimate_map(ch: ChannelModel, grid=None, config: SamplerConfig | None = None) -> MapEstimate:
    """Minimum-energy estimate: anneal from a quantized data-aware start,
    repeated over independent restarts, keeping the best energy.

    The first restart starts from the data-aware initialization; later ones
    start from random symbol sequences so the restarts cover distinct basins.
    """
    cfg = config if config is not None else SamplerConfig()
    grid = _resolve_grid(ch, grid, cfg)
    q = _resolve_order(ch, grid, cfg)
    best: AnnealResult | None = None
    restart_energies = []
    for restart in range(max(1, cfg.n_restarts)):
        rng = rng_stream(cfg.seed, restart)
        if restart == 0:
            symbols0 = initial_symbols(ch, grid)
        else:
            symbols0 = rng.integers(0, len(grid), ch.n)
        state = init_state(ch, grid, symbols0, q, rng, dense_limit=cfg.dense_limit)
        result = anneal(
            state, cfg.schedule, grid, ch,
            engine=cfg.engine, adaptive=cfg.adaptive, adapt_every=cfg.adapt_every,
        )
        restart_energies.append(result.energy.total_bits)
        if best is None or result.energy.total_bits < best.energy.total_bits:
            best = result
    return MapEstimate(
        x_hat=best.x_hat,
        symbols=best.symbols,
        grid=best.grid,
        energy=best.energy,
        trace=best.trace,
        restart_energies=restart_energies,
    )


def _posterior_samples(ch: ChannelModel, grid: QuantGrid, q: int, cfg: SamplerConfig):
    """Burn in at s = 1, then record the dequantized state once per sweep."""
    rng = rng_stream(cfg.seed, 0)
    state = init_state(ch, grid, initial_symbols(ch, grid), q, rng, s=1.0, dense_limit=cfg.dense_limit)
    for _ in range(cfg.burn_in):
        _run_sweep(state, grid, ch, cfg.engine, _null_tracker(state, grid))
    samples = np.empty((cfg.n_samples, state.n), dtype=np.float64)
    symbol_samples = np.empty((cfg.n_samples, state.n), dtype=np.int64)
    for k in range(cfg.n_samples):
        _run_sweep(state, grid, ch, cfg.engine, _null_tracker(state, grid))
        symbol_samples[k] = state.symbols
        samples[k] = grid.levels[state.symbols]
    return samples, symbol_samples


def _null_tracker(state: AnnealState, grid: QuantGrid) -> _BestTracker:
    return _BestTracker(
        var_energy=math.inf,
        symbols=np.empty(state.n, dtype=np.int64),
        x_hat=state.x_hat,
        grid=grid,
    )


@dataclass
class MmseEstimate:
    x_hat: np.ndarray
    samples: np.ndarray


def estimate_mmse(ch: ChannelModel, grid=None, config: SamplerConfig | None = None) -> MmseEstimate:
    """Posterior-mean estimate: average Gibbs samples at fixed s = 1.

    Approximates the conditional expectation under the coding-length prior;
    the returned samples support Monte-Carlo error estimates.
    """
    cfg = config if config is not None else SamplerConfig()
    cfg = replace_no_adapt(cfg)
    grid = _resolve_grid(ch, grid, cfg)
    q = _resolve_order(ch, grid, cfg)
    samples, _ = _posterior_samples(ch, grid, q, cfg)
    return MmseEstimate(x_hat=samples.mean(axis=0), samples=samples)


def replace_no_adapt(cfg: SamplerConfig) -> SamplerConfig:
    # posterior sampling keeps the grid fixed; adaptation would change the target law
    return replace(cfg, adaptive=False) if cfg.adaptive else cfg


def squared_error(x, w) -> float:
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    return float(np.mean((x - w) ** 2))


@dataclass
class MinDistortionEstimate:
    x_hat: np.ndarray
    expected_distortion: float
    n_candidates: int


def estimate_min_distortion(
    ch: ChannelModel,
    distortion: Callable[[np.ndarray, np.ndarray], float],
    grid=None,
    config: SamplerConfig | None = None,
) -> MinDistortionEstimate:
    """Minimize posterior-averaged distortion over a sample-derived candidate set.

    Candidates are the distinct posterior samples plus their coordinatewise
    mean, median, and modal level; the sampled average of the distortion to
    each candidate picks the winner. With squared error and a rich candidate
    set this reduces to the posterior mean.
    """
    cfg = config if config is not None else SamplerConfig()
    cfg = replace_no_adapt(cfg)
    grid = _resolve_grid(ch, grid, cfg)
    q = _resolve_order(ch, grid, cfg)
    samples, symbol_samples = _posterior_samples(ch, grid, q, cfg)

    candidates = [np.asarray(row) for row in np.unique(samples, axis=0)]
    candidates.append(samples.mean(axis=0))
    candidates.append(np.median(samples, axis=0))
    n_levels = len(grid)
    mode_symbols = np.empty(samples.shape[1], dtype=np.int64)
    for i in range(samples.shape[1]):
        histogram = np.bincount(symbol_samples[:, i], minlength=n_levels)
        mode_symbols[i] = int(np.argmax(histogram))  # ties break to the lower level
    candidates.append(grid.levels[mode_symbols])

    best_cost = math.inf
    best_candidate = candidates[0]
    for cand in candidates:
        cost = float(np.mean([distortion(samples[k], cand) for k in range(samples.shape[0])]))
        if cost < best_cost:
            best_cost = cost
            best_candidate = cand
    return MinDistortionEstimate(
        x_hat=np.asarray(best_candidate, dtype=np.float64).copy(),
        expected_distortion=best_cost,
        n_candidates=len(candidates),
    )
