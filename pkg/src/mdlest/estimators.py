"""Estimator classes with the scikit-learn fit/predict contract.

The measurement matrix plays the role of the design matrix: ``fit(X, y)``
recovers the signal from measurements ``y`` of ``X @ signal`` and stores it
in ``coef_``, like a linear model. Pass ``X=None`` for the identity operator
(plain denoising / lossy coding of ``y`` itself). Hyperparameters follow
scikit-learn conventions so the estimators work with ``clone``,
``get_params``, and pipeline-style composition.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np
from sklearn.base import BaseEstimator

from .baselines import fista
from .channel import ChannelModel, GaussianNoise, SystemOperator, identity_operator, matrix_operator
from .quantizer import QuantGrid
from .sampler import (
    AnnealSchedule,
    SamplerConfig,
    estimate_map,
    estimate_min_distortion,
    estimate_mmse,
    squared_error,
)
from .validation import as_matrix, as_vector, check_positive


class _GibbsEstimatorBase(BaseEstimator):
    def __init__(
        self,
        noise_var: float = 1.0,
        grid: Optional[QuantGrid] = None,
        q: Optional[int] = None,
        s0: float = 0.2,
        rho: float = 1.15,
        sweeps_per_stage: int = 2,
        n_sweeps: int = 400,
        n_restarts: int = 3,
        adaptive_grid: bool = False,
        adapt_every: int = 10,
        burn_in: int = 50,
        n_samples: int = 200,
        engine: str = "auto",
        random_state: int = 0,
    ):
        self.noise_var = noise_var
        self.grid = grid
        self.q = q
        self.s0 = s0
        self.rho = rho
        self.sweeps_per_stage = sweeps_per_stage
        self.n_sweeps = n_sweeps
        self.n_restarts = n_restarts
        self.adaptive_grid = adaptive_grid
        self.adapt_every = adapt_every
        self.burn_in = burn_in
        self.n_samples = n_samples
        self.engine = engine
        self.random_state = random_state

    def _channel(self, X, y) -> ChannelModel:
        y = as_vector(y, "y")
        if X is None:
            op = identity_operator(y.shape[0])
        elif isinstance(X, SystemOperator):
            op = X
        else:
            op = matrix_operator(as_matrix(X, "X"))
        check_positive(self.noise_var, "noise_var")
        return ChannelModel(operator=op, noise=GaussianNoise(float(self.noise_var)), y=y)

    def _config(self) -> SamplerConfig:
        return SamplerConfig(
            q=self.q,
            schedule=AnnealSchedule(
                s0=self.s0,
                rho=self.rho,
                sweeps_per_stage=self.sweeps_per_stage,
                total_sweeps=self.n_sweeps,
            ),
            n_restarts=self.n_restarts,
            adaptive=self.adaptive_grid,
            adapt_every=self.adapt_every,
            burn_in=self.burn_in,
            n_samples=self.n_samples,
            engine=self.engine,
            seed=self.random_state,
        )

    def predict(self, X=None) -> np.ndarray:
        """Predicted measurements of the fitted signal under operator X."""
        if not hasattr(self, "coef_"):
            raise AttributeError("estimator is not fitted yet; call fit first")
        if X is None:
            return self.coef_.copy()
        return as_matrix(X, "X") @ self.coef_


class MapEstimator(_GibbsEstimatorBase):
    """Minimum coding-length-plus-misfit signal estimate via annealed Gibbs sampling.

    After ``fit(X, y)`` the recovered signal is in ``coef_``; ``energy_``
    holds the bit counts of the best state and ``trace_`` the per-sweep
    energy trajectory of the best restart.
    """

    def fit(self, X, y):
        ch = self._channel(X, y)
        result = estimate_map(ch, self.grid, self._config())
        self.coef_ = result.x_hat
        self.symbols_ = result.symbols
        self.grid_ = result.grid
        self.energy_ = result.energy
        self.trace_ = result.trace
        self.restart_energies_ = result.restart_energies
        self.n_features_in_ = ch.n
        return self


class PosteriorMeanEstimator(_GibbsEstimatorBase):
    """Posterior-mean signal estimate (squared-error optimal) by Gibbs sampling
    at unit inverse temperature; ``samples_`` retains the posterior draws."""

    def fit(self, X, y):
        ch = self._channel(X, y)
        result = estimate_mmse(ch, self.grid, self._config())
        self.coef_ = result.x_hat
        self.samples_ = result.samples
        self.n_features_in_ = ch.n
        return self


class MinDistortionEstimator(_GibbsEstimatorBase):
    """Estimate minimizing a posterior-averaged custom distortion.

    ``distortion`` is a callable ``(sample, candidate) -> float``; squared
    error by default, in which case this approximates the posterior mean.
    """

    def __init__(
        self,
        noise_var: float = 1.0,
        distortion: Callable[[np.ndarray, np.ndarray], float] = squared_error,
        grid: Optional[QuantGrid] = None,
        q: Optional[int] = None,
        s0: float = 0.2,
        rho: float = 1.15,
        sweeps_per_stage: int = 2,
        n_sweeps: int = 400,
        n_restarts: int = 3,
        adaptive_grid: bool = False,
        adapt_every: int = 10,
        burn_in: int = 50,
        n_samples: int = 200,
        engine: str = "auto",
        random_state: int = 0,
    ):
        super().__init__(
            noise_var=noise_var, grid=grid, q=q, s0=s0, rho=rho,
            sweeps_per_stage=sweeps_per_stage, n_sweeps=n_sweeps,
            n_restarts=n_restarts, adaptive_grid=adaptive_grid,
            adapt_every=adapt_every, burn_in=burn_in, n_samples=n_samples,
            engine=engine, random_state=random_state,
        )
        self.distortion = distortion

    def fit(self, X, y):
        ch = self._channel(X, y)
        result = estimate_min_distortion(ch, self.distortion, self.grid, self._config())
        self.coef_ = result.x_hat
        self.expected_distortion_ = result.expected_distortion
        self.n_features_in_ = ch.n
        return self


class FistaLasso(BaseEstimator):
    """l1-regularized least squares via restarted accelerated proximal gradient.

    Minimizes 0.5*||y - X w||^2 + alpha*||w||_1; the solution lands in
    ``coef_``. Used as the convex-recovery baseline.
    """

    def __init__(self, alpha: float = 0.1, max_iter: int = 1000, tol: float = 1e-8):
        self.alpha = alpha
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y):
        result = fista(as_matrix(X, "X"), as_vector(y, "y"), self.alpha,
                       max_iter=self.max_iter, tol=self.tol)
        self.coef_ = result.x
        self.n_iter_ = result.n_iter
        self.objective_ = result.objective
        self.n_features_in_ = self.coef_.shape[0]
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "coef_"):
            raise AttributeError("estimator is not fitted yet; call fit first")
        return as_matrix(X, "X") @ self.coef_
