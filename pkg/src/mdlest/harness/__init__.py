from .config import ExperimentConfig, load_config
from .csvio import emit_csv, parse_csv
from .experiments import (
    ResultsTable,
    run_cs_experiment,
    run_denoise_experiment,
    run_lossy_experiment,
    run_oracle_suite,
)

__all__ = [
    "ExperimentConfig",
    "load_config",
    "emit_csv",
    "parse_csv",
    "ResultsTable",
    "run_cs_experiment",
    "run_denoise_experiment",
    "run_lossy_experiment",
    "run_oracle_suite",
]
