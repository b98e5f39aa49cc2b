from __future__ import annotations

import math

import numpy as np
import pytest

from mdlest.sources import SourceSpec, add_awgn, gaussian_matrix, generate


class TestGenerate:
    def test_bernoulli_nonzero_fraction(self):
        spec = SourceSpec(kind="bernoulli-gaussian", length=10_000, seed=0, p=0.03)
        x = generate(spec)
        fraction = np.mean(x != 0)
        assert 0.02 <= fraction <= 0.04

    def test_bernoulli_pm1_amplitudes(self):
        x = generate(SourceSpec(kind="bernoulli-gaussian", length=5000, seed=1, p=0.1))
        values = np.unique(x)
        assert set(values.tolist()) <= {-1.0, 0.0, 1.0}

    def test_bernoulli_gaussian_amplitudes(self):
        x = generate(SourceSpec(kind="bernoulli-gaussian", length=20_000, seed=2, p=0.5,
                                amplitude="gaussian"))
        spikes = x[x != 0]
        assert abs(spikes.std() - 1.0) < 0.05

    def test_laplace_mean_absolute_value(self):
        x = generate(SourceSpec(kind="laplace", length=100_000, seed=3, scale=1.0))
        assert abs(np.mean(np.abs(x)) - 1.0) < 0.02

    def test_laplace_scale(self):
        x = generate(SourceSpec(kind="laplace", length=100_000, seed=4, scale=2.5))
        assert abs(np.mean(np.abs(x)) - 2.5) < 0.05

    def test_markov_absorbing_is_constant(self):
        x = generate(SourceSpec(kind="two-state-markov", length=500, seed=5,
                                transitions=(0.0, 0.0)))
        assert len(np.unique(x)) == 1

    def test_markov_transition_frequencies(self):
        p01, p10 = 0.15, 0.3
        x = generate(SourceSpec(kind="two-state-markov", length=100_000, seed=6,
                                transitions=(p01, p10), emissions=(0.0, 1.0)))
        s = (x == 1.0).astype(int)
        from01 = np.mean(s[1:][s[:-1] == 0])
        from10 = 1.0 - np.mean(s[1:][s[:-1] == 1])
        assert abs(from01 - p01) < 0.02
        assert abs(from10 - p10) < 0.02

    def test_deterministic_given_seed(self):
        spec = SourceSpec(kind="laplace", length=100, seed=7)
        assert np.array_equal(generate(spec), generate(spec))

    def test_rejects_bad_spec(self):
        with pytest.raises(ValueError):
            SourceSpec(kind="cauchy", length=10, seed=0)
        with pytest.raises(ValueError):
            SourceSpec(kind="bernoulli-gaussian", length=10, seed=0, p=1.5)
        with pytest.raises(ValueError):
            SourceSpec(kind="laplace", length=10, seed=0, scale=-1.0)


class TestGaussianMatrix:
    def test_column_norms_near_one(self):
        op = gaussian_matrix(200, 64, seed=0)
        colsq = (op.matrix**2).sum(axis=0)
        assert abs(colsq.mean() - 1.0) < 0.05

    def test_same_seed_same_matrix(self):
        a = gaussian_matrix(16, 8, seed=3)
        b = gaussian_matrix(16, 8, seed=3)
        assert np.array_equal(a.matrix, b.matrix)

    def test_single_entry(self):
        op = gaussian_matrix(1, 1, seed=4)
        assert op.matrix.shape == (1, 1)
        draws = np.array([gaussian_matrix(1, 1, seed=s).matrix[0, 0] for s in range(400)])
        assert abs(draws.std() - 1.0) < 0.1  # entries are N(0, 1/m) with m = 1


class TestAddAwgn:
    def test_infinite_snr_passthrough(self):
        w = np.array([1.0, -2.0, 3.0])
        y, sigma2 = add_awgn(w, math.inf, seed=0)
        assert np.array_equal(y, w)
        assert sigma2 == 0.0

    def test_zero_db_matches_signal_power(self):
        rng = np.random.default_rng(1)
        w = rng.normal(0, 1, 1000)
        _, sigma2 = add_awgn(w, 0.0, seed=1)
        assert sigma2 == pytest.approx(float(w @ w) / 1000, rel=1e-12)

    def test_realized_snr_close_to_target(self):
        rng = np.random.default_rng(2)
        w = rng.normal(0, 1, 10_000)
        for target in (0.0, 5.0, 10.0):
            y, sigma2 = add_awgn(w, target, seed=2)
            noise = y - w
            realized = 10 * math.log10(float(w @ w) / float(noise @ noise))
            assert abs(realized - target) < 0.5

    def test_rejects_zero_signal(self):
        with pytest.raises(ValueError):
            add_awgn(np.zeros(5), 10.0, seed=0)
