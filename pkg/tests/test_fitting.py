"""Tests for envelope fits of decay, growth and energy inequalities."""

import numpy as np
import pytest

from attractor_lab.certificates.fitting import (
    fit_decay_envelope,
    fit_differential_inequality,
    fit_growth_envelope,
)
from attractor_lab.errors import InsufficientDataError


@pytest.fixture
def times():
    return np.linspace(0.0, 10.0, 2001)


class TestDecayEnvelope:
    """a e^{-b t} above the data."""

    def test_exact_exponential(self, times):
        values = 2.0 * np.exp(-0.5 * times)
        beta = fit_decay_envelope(times, values)
        assert beta.b == pytest.approx(0.5, rel=1e-8)
        assert beta.a == pytest.approx(2.0, rel=1e-8)
        assert np.all(beta(times) >= values * (1 - 1e-12))

    def test_noisy_data_dominated(self, times):
        rng = np.random.default_rng(0)
        values = np.exp(-times) * (1.0 + 0.05 * rng.uniform(size=times.size))
        beta = fit_decay_envelope(times, values)
        assert np.all(beta(times) >= values * (1 - 1e-12))

    def test_growing_data_falls_back_to_slow_rate(self, times):
        beta = fit_decay_envelope(times, 1.0 + 0.1 * times)
        assert beta.b == pytest.approx(1e-3)

    def test_vanishing_tail_falls_back_to_slow_rate(self, times):
        values = np.where(times < 5.0, np.exp(-times), 0.0)
        beta = fit_decay_envelope(times, values, tail_fraction=0.6)
        assert beta.b == pytest.approx(1e-3)
        assert np.all(beta(times) >= values)

    def test_too_few_points(self):
        with pytest.raises(InsufficientDataError):
            fit_decay_envelope([0.0, 1.0], [1.0, 0.5])


class TestGrowthEnvelope:
    """p (1 - e^{-q t}) + r above the running maximum."""

    def test_saturating_data(self, times):
        values = 1.0 - np.exp(-times)
        J = fit_growth_envelope(times, values)
        assert J.r == 0.0
        assert np.all(J(times) >= values - 1e-12)

    def test_flat_data(self, times):
        J = fit_growth_envelope(times, np.full(times.size, 0.3))
        assert J.p == 0.0
        assert J(5.0) == pytest.approx(0.3)

    def test_oscillating_data(self, times):
        values = times / 10.0 + 0.2 * np.sin(5 * times) ** 2
        J = fit_growth_envelope(times, values)
        assert np.all(J(times) >= values - 1e-12)


class TestDifferentialInequality:
    """(k, nu, J) fitted to an energy curve."""

    def test_pure_decay(self, times):
        fit = fit_differential_inequality(times, 2.0 * np.exp(-times), epsilon=0.5)
        assert fit.k == 0.0
        assert fit.J == 0.0
        assert fit.bounded
        assert fit.max_violation == 0.0

    def test_given_source(self, times):
        fit = fit_differential_inequality(times, 1.0 + np.exp(-times), epsilon=0.5, source=0.5)
        assert fit.J == 0.5
        assert fit.bounded
        assert fit.max_violation == 0.0

    def test_transient_growth(self, times):
        energy = np.exp(1.0 - np.exp(-times)) * np.exp(-times)
        fit = fit_differential_inequality(times, energy, epsilon=1.0)
        assert fit.k > 0
        assert fit.bounded
        assert fit.max_violation <= 1e-3
        assert set(fit.to_dict()) == {"epsilon", "k", "nu", "J", "max_violation", "bounded"}
