"""Certificate constants: t_star, the absorbing-ball certificate and attraction constants.

Given beta, J and a time t_star with beta_star = beta(t_star) < 1:

    R_star = 2 J(t_star) / (1 - beta_star)
    kappa  = beta(0) + (1 - beta_star) / 2

every ball of radius R enters B(kappa R_star) after at most n_R t_star, and a
decaying alpha on the V-part gives exponential attraction to B_V(rho) with

    rho = kappa R_star,  K = alpha(0) R0 / alpha_star,  omega = ln(1/alpha_star) / t_star.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from attractor_lab.certificates.functions import DecayFn, GrowthFn
from attractor_lab.errors import (
    CertificateUnavailableError,
    ConfigurationError,
    DegenerateCertificateError,
    PreconditionError,
)
from attractor_lab.utils.logging_config import get_logger

logger = get_logger(__name__)

T_STAR_TOLERANCE = 1e-9


def _bisect_to_target(beta: DecayFn, target: float, hi: float) -> float:
    t = bisect(lambda s: beta(s) - target, 0.0, hi, xtol=T_STAR_TOLERANCE)
    # Bisection lands within xtol of the crossing; step right until the target holds.
    while beta(t) > target and t < hi:
        t = min(t + T_STAR_TOLERANCE, hi)
    return t


@dataclass(frozen=True)
class TStarChoice:
    """
    Outcome of the automatic t_star search.

    ``target`` exceeds ``requested_target`` when a tabulated beta ends
    above the requested level and its last value is used instead.
    """

    t_star: float
    target: float
    requested_target: float

    @property
    def target_relaxed(self) -> bool:
        return self.target > self.requested_target

    def to_dict(self) -> dict:
        return {
            "t_star": self.t_star,
            "target": self.target,
            "requested_target": self.requested_target,
            "target_relaxed": self.target_relaxed,
        }


def select_t_star(beta: DecayFn, margin: float = 0.5) -> TStarChoice:
    """
    Smallest t (to 1e-9) with beta(t) <= 1 - margin (1 - beta(inf)).

    Args:
        beta: Decay function
        margin: Fraction in (0, 1) of the gap 1 - beta(inf) kept below 1

    Returns:
        The chosen t_star > 0 (1e-9 if the target already holds at t = 0)
        with the target it was bisected to

    Raises:
        CertificateUnavailableError: If beta never drops below 1
    """
    if not 0 < margin < 1:
        raise ConfigurationError(f"margin must lie in (0, 1), got {margin}")
    requested = 1.0 - margin * (1.0 - beta.at_infinity)
    if beta(0.0) <= requested:
        return TStarChoice(T_STAR_TOLERANCE, requested, requested)

    if beta.kind == "table":
        hi = beta.horizon
        end = beta(hi)
        if end >= 1.0:
            raise CertificateUnavailableError(f"tabulated decay never drops below 1 (last value {end:.6g})")
        target = requested
        if end > target:
            logger.warning(
                f"tabulated decay only reaches {end:.6g} > target {target:.6g}; using the first time it gets there"
            )
            target = end
        return TStarChoice(_bisect_to_target(beta, target, hi), target, requested)

    hi = 1.0
    while beta(hi) > requested:
        hi *= 2.0
        if hi > 1e12:
            raise CertificateUnavailableError("decay function does not reach its target")
    return TStarChoice(_bisect_to_target(beta, requested, hi), requested, requested)


def choose_t_star(beta: DecayFn, margin: float = 0.5) -> float:
    """t_star of ``select_t_star``."""
    return select_t_star(beta, margin).t_star


@dataclass(frozen=True)
class TecCertificate:
    """Absorbing-ball certificate for a family with beta and J."""

    t_star: float
    beta_star: float
    beta_zero: float
    J_star: float
    R_star: float
    kappa: float
    residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def absorbing_radius(self) -> float:
        return self.kappa * self.R_star

    @property
    def halving_factor(self) -> float:
        """(1 + beta_star) / 2, the per-step contraction outside B(R_star)."""
        return 0.5 * (1.0 + self.beta_star)

    def step_bound(self, norm: float) -> float:
        """beta_star ||z|| + (1 - beta_star) R_star / 2."""
        return self.beta_star * norm + 0.5 * (1.0 - self.beta_star) * self.R_star

    def to_dict(self) -> dict:
        return {
            "t_star": self.t_star,
            "beta_star": self.beta_star,
            "beta_zero": self.beta_zero,
            "J_star": self.J_star,
            "R_star": self.R_star,
            "kappa": self.kappa,
            "absorbing_radius": self.absorbing_radius,
            "residuals": dict(self.residuals),
        }


def tec_constants(beta: DecayFn, J: GrowthFn, t_star: float) -> TecCertificate:
    """
    Build the absorbing-ball certificate at t_star.

    Raises:
        PreconditionError: If t_star <= 0 or beta(t_star) >= 1
    """
    if not t_star > 0:
        raise PreconditionError(f"t_star must be positive, got {t_star}")
    beta_star = float(beta(t_star))
    if beta_star >= 1.0:
        raise PreconditionError(f"beta(t_star) = {beta_star:.6g} must be < 1")
    beta_zero = float(beta(0.0))
    if beta_zero < 1.0:
        logger.warning(f"beta(0) = {beta_zero:.6g} < 1; the family is contractive from t = 0")

    j_star = float(J(t_star))
    r_star = 2.0 * j_star / (1.0 - beta_star)
    kappa = beta_zero + 0.5 * (1.0 - beta_star)
    residuals = {
        "R_star": abs(r_star * (1.0 - beta_star) - 2.0 * j_star),
        "kappa": abs(kappa - beta_zero - 0.5 * (1.0 - beta_star)),
        "step_identity": abs(0.5 * (1.0 - beta_star) * r_star - j_star),
    }
    return TecCertificate(
        t_star=float(t_star),
        beta_star=beta_star,
        beta_zero=beta_zero,
        J_star=j_star,
        R_star=r_star,
        kappa=kappa,
        residuals=residuals,
    )


def entering_time(radius: float, cert: TecCertificate) -> Tuple[int, float]:
    """
    Number of t_star-steps after which B(radius) lies in B(kappa R_star).

    Returns:
        (n_R, t_R) with t_R = n_R t_star

    Raises:
        PreconditionError: If radius < 0
        DegenerateCertificateError: If R_star = 0 and radius > 0
    """
    if radius < 0:
        raise PreconditionError(f"radius must be nonnegative, got {radius}")
    if radius <= cert.R_star:
        return 0, 0.0
    if cert.R_star == 0:
        raise DegenerateCertificateError("R_star = 0: entering time is unbounded for a positive radius")
    steps = 1 + math.floor((math.log(radius) - math.log(cert.R_star)) / (math.log(2.0) - math.log(1.0 + cert.beta_star)))
    return steps, steps * cert.t_star


@dataclass(frozen=True)
class AttractionCertificate:
    """Exponential attraction dist(S(t)x, B_V(rho)) <= K exp(-omega t)."""

    rho: float
    K: float
    omega: float
    alpha_star: float
    alpha_zero: float
    t_star: float
    R0: float
    tec: TecCertificate

    def bound(self, t):
        return self.K * np.exp(-self.omega * np.asarray(t, dtype=float))

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "K": self.K,
            "omega": self.omega,
            "alpha_star": self.alpha_star,
            "alpha_zero": self.alpha_zero,
            "t_star": self.t_star,
            "R0": self.R0,
            "tec": self.tec.to_dict(),
        }


def main_constants(alpha: DecayFn, beta: DecayFn, J: GrowthFn, R0: float, t_star: float) -> AttractionCertificate:
    """
    Attraction constants (rho, K, omega) for a decomposed flow.

    Raises:
        PreconditionError: If alpha_star or beta_star is outside (0, 1), or R0 <= 0
    """
    if not R0 > 0:
        raise PreconditionError(f"R0 must be positive, got {R0}")
    alpha_star = float(alpha(t_star))
    if alpha_star >= 1.0:
        raise PreconditionError(f"alpha(t_star) = {alpha_star:.6g} must be < 1")
    if alpha_star <= 0.0:
        raise PreconditionError("alpha(t_star) must be positive for a finite rate")
    tec = tec_constants(beta, J, t_star)
    return AttractionCertificate(
        rho=tec.absorbing_radius,
        K=float(alpha(0.0)) * R0 / alpha_star,
        omega=math.log(1.0 / alpha_star) / t_star,
        alpha_star=alpha_star,
        alpha_zero=float(alpha(0.0)),
        t_star=float(t_star),
        R0=float(R0),
        tec=tec,
    )


def certificate_entry(cert: AttractionCertificate, choice: Optional[TStarChoice]) -> dict:
    """Report entry of a certificate; ``t_star_choice`` is None when t_star was given explicitly."""
    entry = cert.to_dict()
    entry["t_star_choice"] = choice.to_dict() if choice is not None else None
    return entry
