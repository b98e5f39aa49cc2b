"""Experiment configuration: YAML with nested sections and a strict schema.

Unknown keys are rejected with the offending field named, since a silently
ignored typo in a sweep definition is the main operational hazard.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import yaml

from ..errors import ConfigError

EXPERIMENTS = ("cs", "lossy", "denoise")


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing required key '{where}.{key}'" if where else f"missing required key '{key}'")
    return section[key]


def _check_keys(section: dict, allowed, where: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"section '{where}' must be a mapping")
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key '{where}.{key}'" if where else f"unknown key '{key}'")


def _as_list_of_numbers(value, where: str) -> list:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"'{where}' must be a nonempty list of numbers")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"'{where}' must contain numbers only")
        out.append(v)
    return out


@dataclass
class SourceConfig:
    kind: str = "bernoulli-gaussian"
    p: float = 0.03
    amplitude: str = "pm1"
    scale: float = 1.0
    transitions: tuple = (0.1, 0.1)
    emissions: tuple = (-1.0, 1.0)


@dataclass
class ChannelConfig:
    m_fractions: Optional[list] = None
    snr_dbs: Optional[list] = None
    sigma2s: Optional[list] = None
    lambdas: Optional[list] = None


@dataclass
class EstimatorConfig:
    grid: str = "fixed"  # "fixed" or "adaptive"
    grid_levels: Optional[int] = None  # adaptive only: coarse uniform start instead of the full grid
    grid_span_factor: float = 1.3  # half-range of the coarse grid relative to the back-projection peak
    q: Optional[int] = None
    grid_log_base: Optional[float] = None
    s0: object = 0.2  # float, or "auto" to scale the hot start with the noise stiffness
    rho: float = 1.15
    sweeps_per_stage: int = 2
    n_sweeps: int = 400
    n_restarts: int = 3
    adapt_every: int = 10
    engine: str = "auto"
    burn_in: int = 50
    n_samples: int = 200


@dataclass
class BaselineConfig:
    fista_lambda_min: float = 1e-3  # fractions of ||J^T y||_inf
    fista_lambda_max: float = 1.0
    fista_lambda_count: int = 15
    fista_max_iter: int = 1000
    fista_tol: float = 1e-8
    ecsq_steps: list = field(default_factory=lambda: [round(0.2 + 0.1 * k, 10) for k in range(29)])
    ba_bins: int = 1201
    ba_span: float = 12.0
    ba_slopes: list = field(default_factory=lambda: [1.0 / (2.0 * d) for d in
                                                     (0.05, 0.08, 0.12, 0.18, 0.27, 0.4, 0.6, 0.9, 1.3, 1.8)])


@dataclass
class OutputConfig:
    dir: str = "results"
    save_traces: bool = False


@dataclass
class ExperimentConfig:
    experiment: str
    n: int
    seeds: list
    source: SourceConfig = field(default_factory=SourceConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    raw: dict = field(default_factory=dict, repr=False)


_SOURCE_KEYS = ("kind", "p", "amplitude", "scale", "transitions", "emissions")
_CHANNEL_KEYS = ("m_fractions", "snr_dbs", "sigma2s", "lambdas")
_ESTIMATOR_KEYS = (
    "grid", "grid_levels", "grid_span_factor", "q", "grid_log_base", "s0", "rho",
    "sweeps_per_stage", "n_sweeps", "n_restarts", "adapt_every", "engine",
    "burn_in", "n_samples",
)
_BASELINE_KEYS = (
    "fista_lambda_min", "fista_lambda_max", "fista_lambda_count",
    "fista_max_iter", "fista_tol", "ecsq_steps", "ba_bins", "ba_span", "ba_slopes",
)
_OUTPUT_KEYS = ("dir", "save_traces")
_TOP_KEYS = ("experiment", "n", "seeds", "source", "channel", "estimator", "baseline", "output")


def from_dict(data: dict) -> ExperimentConfig:
    """Validate a nested mapping against the experiment schema."""
    _check_keys(data, _TOP_KEYS, "")
    experiment = _require(data, "experiment", "")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"'experiment' must be one of {EXPERIMENTS}, got {experiment!r}")
    n = _require(data, "n", "")
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise ConfigError("'n' must be an integer of at least 2")
    seeds = _require(data, "seeds", "")
    if not isinstance(seeds, list) or not seeds or not all(
        isinstance(s, int) and not isinstance(s, bool) for s in seeds
    ):
        raise ConfigError("'seeds' must be a nonempty list of integers (wall-clock seeding is not allowed)")

    source = SourceConfig()
    if "source" in data:
        sec = data["source"]
        _check_keys(sec, _SOURCE_KEYS, "source")
        kw = dict(sec)
        if "transitions" in kw:
            kw["transitions"] = tuple(_as_list_of_numbers(kw["transitions"], "source.transitions"))
        if "emissions" in kw:
            kw["emissions"] = tuple(_as_list_of_numbers(kw["emissions"], "source.emissions"))
        source = SourceConfig(**kw)

    channel = ChannelConfig()
    if "channel" in data:
        sec = data["channel"]
        _check_keys(sec, _CHANNEL_KEYS, "channel")
        kw = {}
        for key in _CHANNEL_KEYS:
            if key in sec:
                kw[key] = _as_list_of_numbers(sec[key], f"channel.{key}")
        channel = ChannelConfig(**kw)

    estimator = EstimatorConfig()
    if "estimator" in data:
        sec = data["estimator"]
        _check_keys(sec, _ESTIMATOR_KEYS, "estimator")
        estimator = EstimatorConfig(**sec)
    if estimator.grid not in ("fixed", "adaptive"):
        raise ConfigError("'estimator.grid' must be 'fixed' or 'adaptive'")
    if estimator.grid_levels is not None:
        if estimator.grid != "adaptive":
            raise ConfigError("'estimator.grid_levels' requires 'estimator.grid: adaptive'")
        if not isinstance(estimator.grid_levels, int) or estimator.grid_levels < 2:
            raise ConfigError("'estimator.grid_levels' must be an integer of at least 2")
    if not (estimator.s0 == "auto" or isinstance(estimator.s0, (int, float))):
        raise ConfigError("'estimator.s0' must be a number or 'auto'")
    if estimator.engine not in ("auto", "numba", "python", "general"):
        raise ConfigError("'estimator.engine' must be one of auto, numba, python, general")

    baseline = BaselineConfig()
    if "baseline" in data:
        sec = data["baseline"]
        _check_keys(sec, _BASELINE_KEYS, "baseline")
        kw = dict(sec)
        for key in ("ecsq_steps", "ba_slopes"):
            if key in kw:
                kw[key] = _as_list_of_numbers(kw[key], f"baseline.{key}")
        baseline = BaselineConfig(**kw)

    output = OutputConfig()
    if "output" in data:
        sec = data["output"]
        _check_keys(sec, _OUTPUT_KEYS, "output")
        output = OutputConfig(**sec)

    cfg = ExperimentConfig(
        experiment=experiment, n=n, seeds=list(seeds), source=source,
        channel=channel, estimator=estimator, baseline=baseline, output=output,
        raw=data,
    )
    _validate_experiment(cfg)
    return cfg


def _validate_experiment(cfg: ExperimentConfig) -> None:
    if cfg.experiment == "cs":
        if not cfg.channel.m_fractions:
            raise ConfigError("cs experiment requires 'channel.m_fractions'")
        if not cfg.channel.snr_dbs:
            raise ConfigError("cs experiment requires 'channel.snr_dbs'")
        for frac in cfg.channel.m_fractions:
            if not 0 < frac:
                raise ConfigError("'channel.m_fractions' entries must be positive")
    elif cfg.experiment == "lossy":
        if not cfg.channel.lambdas:
            raise ConfigError("lossy experiment requires 'channel.lambdas'")
        for lam in cfg.channel.lambdas:
            if lam <= 0:
                raise ConfigError("'channel.lambdas' entries must be positive")
    elif cfg.experiment == "denoise":
        if not cfg.channel.sigma2s:
            raise ConfigError("denoise experiment requires 'channel.sigma2s'")
        for s2 in cfg.channel.sigma2s:
            if s2 <= 0:
                raise ConfigError("'channel.sigma2s' entries must be positive")


def load_config(path) -> ExperimentConfig:
    """Read and validate a YAML experiment configuration."""
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping at the top level")
    try:
        return from_dict(data)
    except TypeError as exc:
        # dataclass kwargs mismatches surface here with a usable message
        raise ConfigError(str(exc)) from exc
