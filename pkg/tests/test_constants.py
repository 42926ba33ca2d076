"""Tests for t_star selection and certificate constants."""

import logging
import math

import pytest

from attractor_lab.certificates.constants import (
    TecCertificate,
    certificate_entry,
    choose_t_star,
    entering_time,
    main_constants,
    select_t_star,
    tec_constants,
)
from attractor_lab.certificates.functions import DecayFn, GrowthFn
from attractor_lab.errors import (
    CertificateUnavailableError,
    ConfigurationError,
    DegenerateCertificateError,
    PreconditionError,
)


def certificate(beta_star: float, R_star: float, t_star: float = 1.0) -> TecCertificate:
    return TecCertificate(
        t_star=t_star,
        beta_star=beta_star,
        beta_zero=1.0,
        J_star=0.5 * (1 - beta_star) * R_star,
        R_star=R_star,
        kappa=1.0 + 0.5 * (1 - beta_star),
    )


class TestChooseTStar:
    """Smallest t with beta(t) <= 1 - margin (1 - beta(inf))."""

    @pytest.mark.parametrize("a,expected", [(4.0, math.log(8.0)), (1.0, math.log(2.0))])
    def test_pure_exponential(self, a, expected):
        t_star = choose_t_star(DecayFn.exp_floor(a, 1.0, 0.0))
        assert t_star == pytest.approx(expected, abs=1e-8)
        assert DecayFn.exp_floor(a, 1.0, 0.0)(t_star) <= 0.5

    def test_target_met_at_zero(self):
        assert choose_t_star(DecayFn.constant(0.5)) == pytest.approx(1e-9)

    def test_floor_moves_target(self):
        beta = DecayFn.exp_floor(2.0, 1.0, 0.5)
        t_star = choose_t_star(beta, margin=0.5)
        assert beta(t_star) == pytest.approx(0.75, abs=1e-8)

    def test_table_never_below_one(self):
        beta = DecayFn.tabulated([0.0, 1.0], [2.0, 1.5], 0.5)
        with pytest.raises(CertificateUnavailableError):
            choose_t_star(beta)

    def test_table_target_beyond_horizon(self, caplog):
        beta = DecayFn.tabulated([0.0, 1.0, 2.0], [2.0, 1.0, 0.8], 0.2)
        with caplog.at_level(logging.WARNING, logger="attractor_lab"):
            t_star = choose_t_star(beta)
        assert beta(t_star) <= 0.8 + 1e-12
        assert "only reaches" in caplog.text

    def test_relaxed_target_recorded(self):
        beta = DecayFn.tabulated([0.0, 1.0, 2.0], [2.0, 1.0, 0.8], 0.2)
        choice = select_t_star(beta)
        assert choice.target_relaxed
        assert choice.target == pytest.approx(0.8)
        assert choice.requested_target == pytest.approx(0.6)
        assert choice.t_star == pytest.approx(choose_t_star(beta))

    def test_unrelaxed_target(self):
        choice = select_t_star(DecayFn.exp_floor(1.0, 1.0, 0.0))
        assert not choice.target_relaxed
        assert choice.to_dict()["target"] == choice.to_dict()["requested_target"] == pytest.approx(0.5)

    @pytest.mark.parametrize("margin", [0.0, 1.0])
    def test_invalid_margin(self, margin):
        with pytest.raises(ConfigurationError):
            choose_t_star(DecayFn.exp_floor(1.0, 1.0), margin)


class TestTecConstants:
    """R_star and kappa."""

    def test_exponential_constant_source(self):
        cert = tec_constants(DecayFn.exp_floor(1.0, 1.0), GrowthFn.constant(2.0), 1.0)
        assert cert.beta_star == pytest.approx(0.367879, abs=1e-6)
        assert cert.R_star == pytest.approx(4.0 / (1.0 - math.exp(-1.0)), rel=1e-12)
        assert cert.R_star == pytest.approx(6.32791, abs=1e-5)
        assert cert.kappa == pytest.approx(1.31606, abs=1e-5)

    def test_floor_and_affine_source(self):
        cert = tec_constants(DecayFn.exp_floor(2.0, 1.0, 0.5), GrowthFn.affine(1.0, 1.0), 2.0)
        assert cert.beta_star == pytest.approx(0.770671, abs=1e-6)
        assert cert.J_star == pytest.approx(3.0)
        assert cert.R_star == pytest.approx(26.1633, abs=1e-4)
        assert cert.kappa == pytest.approx(2.61466, abs=1e-5)
        assert cert.absorbing_radius == pytest.approx(cert.kappa * cert.R_star)

    def test_residuals_vanish(self):
        cert = tec_constants(DecayFn.exp_floor(2.0, 1.0, 0.5), GrowthFn.affine(1.0, 1.0), 2.0)
        assert max(cert.residuals.values()) <= 1e-12

    def test_zero_source(self):
        cert = tec_constants(DecayFn.exp_floor(1.0, 1.0), GrowthFn.constant(0.0), 1.0)
        assert cert.R_star == 0.0

    def test_step_bound(self):
        cert = certificate(0.5, 10.0)
        assert cert.step_bound(20.0) == pytest.approx(12.5)
        assert cert.halving_factor == pytest.approx(0.75)

    def test_beta_star_not_below_one(self):
        with pytest.raises(PreconditionError):
            tec_constants(DecayFn.tabulated([0.0, 1.0], [2.0, 1.5], 0.5), GrowthFn.constant(1.0), 1.0)

    def test_nonpositive_t_star(self):
        with pytest.raises(PreconditionError):
            tec_constants(DecayFn.exp_floor(1.0, 1.0), GrowthFn.constant(1.0), 0.0)

    def test_contractive_family_warns(self, caplog):
        with caplog.at_level(logging.WARNING, logger="attractor_lab"):
            tec_constants(DecayFn.constant(0.5), GrowthFn.constant(1.0), 1.0)
        assert "beta(0)" in caplog.text


class TestEnteringTime:
    """Steps until B(R) lies in B(kappa R_star)."""

    def test_large_radius(self):
        assert entering_time(80.0, certificate(0.5, 10.0)) == (8, 8.0)

    def test_just_outside(self):
        steps, t = entering_time(10.0000001, certificate(0.5, 10.0, t_star=2.0))
        assert steps == 1
        assert t == 2.0

    def test_inside(self):
        assert entering_time(10.0, certificate(0.5, 10.0)) == (0, 0.0)

    def test_degenerate(self):
        with pytest.raises(DegenerateCertificateError):
            entering_time(1.0, certificate(0.5, 0.0))
        assert entering_time(0.0, certificate(0.5, 0.0)) == (0, 0.0)

    def test_negative_radius(self):
        with pytest.raises(PreconditionError):
            entering_time(-1.0, certificate(0.5, 10.0))


class TestMainConstants:
    """rho, K and omega."""

    def test_worked_example(self):
        cert = main_constants(
            DecayFn.exp_floor(2.0, 1.0),
            DecayFn.exp_floor(2.0, 1.0, 0.5),
            GrowthFn.affine(1.0, 1.0),
            5.0,
            2.0,
        )
        assert cert.alpha_star == pytest.approx(0.270671, abs=1e-6)
        assert cert.rho == pytest.approx(68.414, abs=1e-3)
        assert cert.K == pytest.approx(36.9453, abs=1e-4)
        assert cert.omega == pytest.approx(0.653426, abs=1e-6)
        assert cert.bound(0.0) == pytest.approx(cert.K)

    def test_alpha_star_not_below_one(self):
        with pytest.raises(PreconditionError):
            main_constants(DecayFn.exp_floor(4.0, 0.1), DecayFn.exp_floor(1.0, 1.0), GrowthFn.constant(1.0), 1.0, 1.0)

    def test_nonpositive_radius(self):
        with pytest.raises(PreconditionError):
            main_constants(DecayFn.exp_floor(1.0, 1.0), DecayFn.exp_floor(1.0, 1.0), GrowthFn.constant(1.0), 0.0, 1.0)

    def test_to_dict_nests_tec(self):
        cert = main_constants(DecayFn.exp_floor(1.0, 1.0), DecayFn.exp_floor(1.0, 1.0), GrowthFn.constant(1.0), 1.0, 1.0)
        data = cert.to_dict()
        assert data["tec"]["R_star"] == pytest.approx(cert.tec.R_star)

    def test_certificate_entry_records_choice(self):
        beta = DecayFn.tabulated([0.0, 1.0, 2.0], [2.0, 1.0, 0.8], 0.2)
        choice = select_t_star(beta)
        cert = main_constants(DecayFn.exp_floor(1.0, 1.0), beta, GrowthFn.constant(1.0), 1.0, choice.t_star)
        entry = certificate_entry(cert, choice)
        assert entry["t_star_choice"]["target_relaxed"] is True
        assert entry["t_star_choice"]["requested_target"] == pytest.approx(0.6)
        assert entry["rho"] == pytest.approx(cert.rho)

    def test_certificate_entry_with_given_t_star(self):
        cert = main_constants(DecayFn.exp_floor(1.0, 1.0), DecayFn.exp_floor(1.0, 1.0), GrowthFn.constant(1.0), 1.0, 1.0)
        assert certificate_entry(cert, None)["t_star_choice"] is None
