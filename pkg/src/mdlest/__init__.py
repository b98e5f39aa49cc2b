"""mdlest: signal estimation and lossy compression on quantized grids.

Estimates an unknown signal from noisy measurements of a known operator by
minimizing coding length (order-q conditional empirical entropy) plus the
negative log-likelihood, via annealed Gibbs sampling. Ships scikit-learn
style estimator wrappers, convex and information-theoretic baselines, and a
reproducible experiment harness.
"""

__version__ = "0.1.0"

from .baselines import RDPoint, blahut_arimoto, ecsq_rd_point, fista
from .channel import (
    ChannelModel,
    GaussianNoise,
    SystemOperator,
    apply_operator,
    callable_operator,
    delta_log_likelihood,
    gaussian_channel,
    identity_operator,
    log_likelihood,
    matrix_operator,
    residual_state,
)
from .entropy import ContextCounts, build_counts, default_order, delta_h_q, h_q
from .errors import ConfigError, NumericError
from .estimators import FistaLasso, MapEstimator, MinDistortionEstimator, PosteriorMeanEstimator
from .quantizer import (
    QuantGrid,
    adapt_levels,
    build_fixed_grid,
    build_uniform_grid,
    dequantize,
    load_grid,
    quantize,
    save_grid,
)
from .sampler import (
    AnnealSchedule,
    AnnealState,
    EnergyTerms,
    SamplerConfig,
    anneal,
    energy,
    estimate_map,
    estimate_min_distortion,
    estimate_mmse,
    gibbs_sweep,
    init_state,
    initial_symbols,
)
from .sources import SourceSpec, add_awgn, gaussian_matrix, generate

__all__ = [
    "__version__",
    "RDPoint", "blahut_arimoto", "ecsq_rd_point", "fista",
    "ChannelModel", "GaussianNoise", "SystemOperator", "apply_operator",
    "callable_operator", "delta_log_likelihood", "gaussian_channel",
    "identity_operator", "log_likelihood", "matrix_operator", "residual_state",
    "ContextCounts", "build_counts", "default_order", "delta_h_q", "h_q",
    "ConfigError", "NumericError",
    "FistaLasso", "MapEstimator", "MinDistortionEstimator", "PosteriorMeanEstimator",
    "QuantGrid", "adapt_levels", "build_fixed_grid", "build_uniform_grid",
    "dequantize", "load_grid", "quantize", "save_grid",
    "AnnealSchedule", "AnnealState", "EnergyTerms", "SamplerConfig", "anneal",
    "energy", "estimate_map", "estimate_min_distortion", "estimate_mmse",
    "gibbs_sweep", "init_state", "initial_symbols",
    "SourceSpec", "add_awgn", "gaussian_matrix", "generate",
]
