"""Tests for the polynomial nonlinearity, its cutoff split and numeric checks."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from attractor_lab.errors import ConfigurationError
from attractor_lab.nonlinearity.phi import (
    PhiSpec,
    gamma_ramp,
    phi0_eval,
    phi1_eval,
    phi_eval,
    phi_prime_eval,
    psi_eval,
)
from attractor_lab.nonlinearity.validation import (
    find_cutoff,
    remainder_growth_constant,
    verify_dissipativity,
    verify_growth,
)


@pytest.fixture
def quintic():
    return PhiSpec.from_catalog("quintic", sigma=1.0)


@pytest.fixture
def shifted_cubic():
    return PhiSpec.from_catalog("cubic", sigma=1 / np.sqrt(2), lambda_shift=0.5)


class TestPhiSpec:
    """Construction rules."""

    def test_catalog_cubic(self):
        spec = PhiSpec.from_catalog("cubic")
        assert spec.coefficients == (0.0, -1.0, 0.0, 1.0)
        assert spec.degree == 3

    def test_trailing_zeros_trimmed(self):
        assert PhiSpec.from_coefficients([0, 2, 0, 0]).degree == 1

    def test_zero_spec(self):
        assert PhiSpec.from_catalog("zero").is_zero

    def test_even_term_rejected(self):
        with pytest.raises(ConfigurationError, match="odd"):
            PhiSpec.from_coefficients([0, 1, 1])

    def test_degree_above_five_rejected(self):
        with pytest.raises(ConfigurationError):
            PhiSpec.from_coefficients([0, 0, 0, 0, 0, 0, 0, 1])

    def test_unknown_catalog_name(self):
        with pytest.raises(ConfigurationError):
            PhiSpec.from_catalog("septic")

    def test_shift_must_stay_below_first_eigenvalue(self):
        spec = PhiSpec.from_catalog("cubic", lambda_shift=10.0)
        with pytest.raises(ConfigurationError):
            spec.check_shift(np.pi**2)
        spec.check_shift(11.0)

    def test_derivative(self):
        spec = PhiSpec.from_catalog("cubic")
        assert phi_prime_eval(spec, 2.0) == pytest.approx(11.0)


class TestCutoffSplit:
    """phi = phi0 + phi1 with the ramp gamma."""

    def test_quintic_values(self, quintic):
        assert phi0_eval(quintic, 2.0) == pytest.approx(32.0)
        assert psi_eval(quintic, 2.0) == pytest.approx(16.0)
        assert phi1_eval(quintic, 2.0) == pytest.approx(0.0, abs=1e-12)
        assert phi1_eval(quintic, 0.5) == pytest.approx(0.03125)

    def test_shifted_cubic_values(self, shifted_cubic):
        assert phi0_eval(shifted_cubic, 2.0) == pytest.approx(7.0)
        assert psi_eval(shifted_cubic, 2.0) == pytest.approx(3.5)
        assert phi1_eval(shifted_cubic, 2.0) == pytest.approx(-1.0)

    def test_ramp(self):
        u = np.array([-3.0, -1.5, 0.0, 1.0, 1.25, 2.0, 5.0])
        assert_allclose(gamma_ramp(1.0, u), [1.0, 0.5, 0.0, 0.0, 0.25, 1.0, 1.0])

    @pytest.mark.parametrize("name", ["cubic", "quintic", "quintic_shifted"])
    def test_split_identity(self, name):
        spec = PhiSpec.from_catalog(name, sigma=1.5, lambda_shift=0.3)
        u = np.random.default_rng(0).uniform(-10.0, 10.0, 100_000)
        assert np.max(np.abs(phi0_eval(spec, u) + phi1_eval(spec, u) - phi_eval(spec, u))) <= 1e-12 * np.max(
            np.abs(phi_eval(spec, u))
        )

    def test_phi0_vanishes_inside_cutoff(self, quintic):
        u = np.linspace(-1.0, 1.0, 101)
        assert np.all(phi0_eval(quintic, u) == 0.0)

    def test_remainder_linear_beyond_ramp(self, shifted_cubic):
        u = np.linspace(2.0, 50.0, 101)
        assert_allclose(phi1_eval(shifted_cubic, u), -0.5 * u, atol=1e-9)

    @pytest.mark.parametrize("fixture_name", ["quintic", "shifted_cubic"])
    def test_sign_condition(self, fixture_name, request):
        spec = request.getfixturevalue(fixture_name)
        u = np.random.default_rng(1).uniform(-10.0, 10.0, 10_000)
        assert np.all(phi0_eval(spec, u) * u >= -1e-12)

    def test_psi_is_phi0_over_u(self, quintic):
        u = np.linspace(1.01, 9.0, 50)
        assert_allclose(psi_eval(quintic, u) * u, phi0_eval(quintic, u), rtol=1e-12)
        assert psi_eval(quintic, 0.5) == 0.0

    def test_psi_needs_positive_sigma(self):
        with pytest.raises(ConfigurationError):
            psi_eval(PhiSpec.from_catalog("cubic"), 1.0)


class TestGrowthCheck:
    """verify_growth and the remainder constant."""

    def test_quintic_growth_constant(self):
        report = verify_growth(PhiSpec.from_catalog("quintic"), sample_range=3.0, samples=10_000)
        assert 0.0 < report.c_est <= 5.0 + 1e-9
        assert report.spec.c_est == report.c_est

    def test_zero_growth_constant(self):
        assert verify_growth(PhiSpec.from_catalog("zero")).c_est == 0.0

    def test_linear_growth_constant(self):
        c_est = verify_growth(PhiSpec.from_catalog("linear")).c_est
        assert 0.99 <= c_est <= 1.0

    def test_psi_bound_quintic(self, quintic):
        report = verify_growth(quintic)
        assert report.c_psi is not None
        assert report.c_psi <= 1.0 + 1e-12
        assert report.psi_bound_ok

    def test_psi_not_measured_without_cutoff(self):
        report = verify_growth(PhiSpec.from_catalog("cubic"))
        assert report.c_psi is None
        assert report.passed

    def test_same_seed_same_estimate(self, quintic):
        assert verify_growth(quintic, seed=4).c_est == verify_growth(quintic, seed=4).c_est

    def test_invalid_sampling(self, quintic):
        with pytest.raises(ConfigurationError):
            verify_growth(quintic, sample_range=0.0)

    def test_remainder_constant_stable_under_wider_range(self, quintic):
        narrow = remainder_growth_constant(quintic, sample_range=10.0)
        wide = remainder_growth_constant(quintic, sample_range=20.0)
        assert narrow > 0
        assert wide == pytest.approx(narrow, rel=1e-2)


class TestDissipativity:
    """liminf phi(u)/u > -lambda_1."""

    def test_quintic_passes(self):
        report = verify_dissipativity(PhiSpec.from_catalog("quintic"), np.pi**2)
        assert report.passed
        assert report.margin > 0

    def test_cubic_margin_near_origin(self):
        report = verify_dissipativity(PhiSpec.from_catalog("cubic"), np.pi**2, tail_range=(1e-3, 10.0))
        assert report.margin == pytest.approx(-1.0, abs=1e-5)
        assert report.passed

    def test_strong_negative_linear_fails(self):
        spec = PhiSpec.from_coefficients([0, -20])
        report = verify_dissipativity(spec, np.pi**2)
        assert report.margin == pytest.approx(-20.0)
        assert not report.passed

    def test_invalid_tail_range(self):
        with pytest.raises(ConfigurationError):
            verify_dissipativity(PhiSpec.from_catalog("cubic"), 1.0, tail_range=(5.0, 1.0))


class TestFindCutoff:
    """Smallest sigma for the sign condition."""

    def test_shifted_cubic(self):
        sigma = find_cutoff(PhiSpec.from_catalog("cubic"), lambda_shift=0.5)
        assert sigma == pytest.approx(1 / np.sqrt(2), abs=1e-3)

    def test_quintic_needs_no_cutoff(self):
        assert find_cutoff(PhiSpec.from_catalog("quintic"), lambda_shift=0.0) == 0.0
