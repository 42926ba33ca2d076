"""Numerical checks of growth and dissipativity for PhiSpec."""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from attractor_lab.errors import ConfigurationError
from attractor_lab.nonlinearity.phi import PhiSpec, phi_eval, phi1_eval, psi_eval
from attractor_lab.utils.logging_config import get_logger

logger = get_logger(__name__)

# psi must satisfy |psi(u)| <= c_psi |u|^4 for some c_psi <= PSI_FACTOR * c_est.
PSI_FACTOR = 10.0


@dataclass(frozen=True)
class GrowthReport:
    """Result of verify_growth."""

    spec: PhiSpec
    c_est: float
    c_psi: Optional[float]
    psi_bound_ok: bool
    samples: int

    @property
    def passed(self) -> bool:
        return self.psi_bound_ok

    def to_dict(self) -> dict:
        return {
            "c_est": self.c_est,
            "c_psi": self.c_psi,
            "psi_bound_ok": self.psi_bound_ok,
            "samples": self.samples,
        }


@dataclass(frozen=True)
class DissipativityReport:
    """Result of verify_dissipativity."""

    margin: float
    lambda1: float
    tail_range: Tuple[float, float]

    @property
    def passed(self) -> bool:
        return self.margin > -self.lambda1

    def to_dict(self) -> dict:
        return {
            "margin": self.margin,
            "lambda1": self.lambda1,
            "tail_range": list(self.tail_range),
            "passed": self.passed,
        }


def _sample_pairs(sample_range: float, samples: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    grid = np.linspace(-sample_range, sample_range, samples)
    rng = np.random.default_rng(seed)
    u = np.concatenate([grid[:-1], rng.uniform(-sample_range, sample_range, samples)])
    v = np.concatenate([grid[1:], rng.uniform(-sample_range, sample_range, samples)])
    keep = u != v
    return u[keep], v[keep]


def verify_growth(spec: PhiSpec, sample_range: float = 10.0, samples: int = 20001, seed: int = 0) -> GrowthReport:
    """
    Estimate the growth constant of phi and check the psi bound.

    c_est is the largest sampled value of
    |phi(u) - phi(v)| / (|u - v| (1 + u^4 + v^4)) over consecutive grid
    pairs and random pairs in [-range, range].

    Args:
        spec: Nonlinearity
        sample_range: Half-width of the sampling interval
        samples: Grid size (and number of random pairs)
        seed: Seed for the random pairs

    Returns:
        GrowthReport whose ``spec`` carries the measured c_est
    """
    if sample_range <= 0 or samples < 2:
        raise ConfigurationError("verify_growth needs sample_range > 0 and samples >= 2")

    u, v = _sample_pairs(sample_range, samples, seed)
    ratio = np.abs(phi_eval(spec, u) - phi_eval(spec, v)) / (np.abs(u - v) * (1.0 + u**4 + v**4))
    c_est = float(np.max(ratio)) if ratio.size else 0.0

    c_psi: Optional[float] = None
    psi_ok = True
    if spec.sigma > 0:
        points = np.concatenate([u, v])
        points = points[np.abs(points) > spec.sigma]
        if points.size:
            c_psi = float(np.max(np.abs(psi_eval(spec, points)) / points**4))
        else:
            c_psi = 0.0
        psi_ok = c_psi <= PSI_FACTOR * c_est + 1e-12
        if not psi_ok:
            logger.warning(f"psi bound fails: c_psi={c_psi:.4g} > {PSI_FACTOR} * c_est={c_est:.4g}")

    logger.debug(f"verify_growth({spec.name}): c_est={c_est:.6g}, c_psi={c_psi}")
    return GrowthReport(
        spec=spec.with_growth_constant(c_est),
        c_est=c_est,
        c_psi=c_psi,
        psi_bound_ok=psi_ok,
        samples=int(u.size),
    )


def default_tail_range(spec: PhiSpec) -> Tuple[float, float]:
    lower = max(spec.sigma + 1.0, 10.0)
    return lower, 10.0 * lower


def verify_dissipativity(
    spec: PhiSpec,
    lambda1: float,
    tail_range: Optional[Tuple[float, float]] = None,
    samples: int = 20001,
) -> DissipativityReport:
    """
    Check liminf_{|u| -> inf} phi(u)/u > -lambda_1 on a sampled tail band.

    Args:
        spec: Nonlinearity
        lambda1: First eigenvalue of A
        tail_range: (u_min, u_max) with 0 < u_min < u_max; both signs are sampled
        samples: Points per sign

    Returns:
        DissipativityReport with margin = min phi(u)/u over the band
    """
    lo, hi = tail_range if tail_range is not None else default_tail_range(spec)
    if not 0 < lo < hi:
        raise ConfigurationError(f"tail_range must satisfy 0 < u_min < u_max, got {(lo, hi)}")
    band = np.linspace(lo, hi, samples)
    u = np.concatenate([band, -band])
    margin = float(np.min(phi_eval(spec, u) / u))
    return DissipativityReport(margin=margin, lambda1=float(lambda1), tail_range=(float(lo), float(hi)))


def remainder_growth_constant(spec: PhiSpec, sample_range: float = 10.0, samples: int = 20001) -> float:
    """Smallest sampled K with |phi1(u)| <= K (1 + |u|)."""
    u = np.linspace(-sample_range, sample_range, samples)
    return float(np.max(np.abs(phi1_eval(spec, u)) / (1.0 + np.abs(u))))


def find_cutoff(spec: PhiSpec, lambda_shift: float, search_max: float = 10.0, samples: int = 100001) -> float:
    """
    Smallest sampled sigma with phi(u) u + lambda u^2 >= 0 for |u| > sigma.

    Returns 0 when the sign condition already holds on the whole sampled grid.
    """
    mags = np.linspace(0.0, search_max, samples)[1:]
    u = np.concatenate([mags, -mags])
    bad = phi_eval(spec, u) * u + lambda_shift * u**2 < 0
    if not np.any(bad):
        return 0.0
    return float(np.max(np.abs(u[bad])))
