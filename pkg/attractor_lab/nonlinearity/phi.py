"""Odd polynomial nonlinearities and their cutoff decomposition.

phi is split as phi = phi0 + phi1 with a continuous ramp gamma(u) that is 0
for |u| <= sigma and 1 for |u| >= sigma + 1:

    phi0(u) = gamma(u) (phi(u) + lambda u),   phi1 = phi - phi0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from attractor_lab.errors import ConfigurationError

ArrayLike = Union[float, np.ndarray]

MAX_DEGREE = 5

# Power-series coefficients, index = degree.
CATALOG = {
    "zero": (0.0,),
    "linear": (0.0, 1.0),
    "cubic": (0.0, -1.0, 0.0, 1.0),
    "quintic": (0.0, 0.0, 0.0, 0.0, 0.0, 1.0),
    "quintic_shifted": (0.0, -1.0, 0.0, 0.0, 0.0, 1.0),
}


@dataclass(frozen=True)
class PhiSpec:
    """
    An odd polynomial nonlinearity with cutoff parameters.

    Attributes:
        coefficients: Power-series coefficients, index = degree
        sigma: Cutoff level where phi0 starts to act
        lambda_shift: Shift lambda with 0 <= lambda < lambda_1
        c_est: Growth constant measured by verify_growth (None until measured)
        name: Catalog name or "custom"
    """

    coefficients: Tuple[float, ...]
    sigma: float = 0.0
    lambda_shift: float = 0.0
    c_est: Optional[float] = None
    name: str = "custom"

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.coefficients)
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        if not coeffs:
            coeffs = (0.0,)
        if len(coeffs) - 1 > MAX_DEGREE:
            raise ConfigurationError(f"degree {len(coeffs) - 1} exceeds {MAX_DEGREE}")
        if any(c != 0.0 for c in coeffs[0::2]):
            raise ConfigurationError("phi must be odd: even-degree coefficients must vanish")
        if self.sigma < 0:
            raise ConfigurationError(f"sigma must be nonnegative, got {self.sigma}")
        if self.lambda_shift < 0:
            raise ConfigurationError(f"lambda_shift must be nonnegative, got {self.lambda_shift}")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_catalog(cls, name: str, sigma: float = 0.0, lambda_shift: float = 0.0) -> "PhiSpec":
        if name not in CATALOG:
            raise ConfigurationError(f"unknown nonlinearity '{name}', choose from {sorted(CATALOG)}")
        return cls(CATALOG[name], sigma=sigma, lambda_shift=lambda_shift, name=name)

    @classmethod
    def from_coefficients(
        cls, coefficients: Sequence[float], sigma: float = 0.0, lambda_shift: float = 0.0
    ) -> "PhiSpec":
        return cls(tuple(coefficients), sigma=sigma, lambda_shift=lambda_shift)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.coefficients)

    def derivative_coefficients(self) -> Tuple[float, ...]:
        return tuple(k * c for k, c in enumerate(self.coefficients))[1:] or (0.0,)

    def with_growth_constant(self, c_est: float) -> "PhiSpec":
        return replace(self, c_est=float(c_est))

    def check_shift(self, lambda1: float) -> None:
        """Raise ConfigurationError unless 0 <= lambda_shift < lambda_1."""
        if not 0 <= self.lambda_shift < lambda1:
            raise ConfigurationError(
                f"lambda_shift={self.lambda_shift} must satisfy 0 <= lambda < lambda_1={lambda1:.6g}"
            )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "coefficients": list(self.coefficients),
            "sigma": self.sigma,
            "lambda_shift": self.lambda_shift,
            "c_est": self.c_est,
        }


def _finish(result: np.ndarray, scalar: bool) -> ArrayLike:
    return float(result) if scalar else result


def _polyval(coefficients: Tuple[float, ...], u: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyval(u, coefficients)


def gamma_ramp(sigma: float, u: ArrayLike) -> ArrayLike:
    """Ramp gamma(u) = clip(|u| - sigma, 0, 1)."""
    arr = np.asarray(u, dtype=float)
    return _finish(np.clip(np.abs(arr) - sigma, 0.0, 1.0), arr.ndim == 0)


def phi_eval(spec: PhiSpec, u: ArrayLike) -> ArrayLike:
    arr = np.asarray(u, dtype=float)
    return _finish(_polyval(spec.coefficients, arr), arr.ndim == 0)


def phi_prime_eval(spec: PhiSpec, u: ArrayLike) -> ArrayLike:
    arr = np.asarray(u, dtype=float)
    return _finish(_polyval(spec.derivative_coefficients(), arr), arr.ndim == 0)


def phi0_eval(spec: PhiSpec, u: ArrayLike) -> ArrayLike:
    """Cut-off part phi0 = gamma (phi + lambda u)."""
    arr = np.asarray(u, dtype=float)
    gamma = np.clip(np.abs(arr) - spec.sigma, 0.0, 1.0)
    return _finish(gamma * (_polyval(spec.coefficients, arr) + spec.lambda_shift * arr), arr.ndim == 0)


def phi1_eval(spec: PhiSpec, u: ArrayLike) -> ArrayLike:
    """Remainder phi1 = phi - phi0; equals -lambda u for |u| >= sigma + 1."""
    arr = np.asarray(u, dtype=float)
    return _finish(_polyval(spec.coefficients, arr) - np.asarray(phi0_eval(spec, arr)), arr.ndim == 0)


def psi_eval(spec: PhiSpec, u: ArrayLike) -> ArrayLike:
    """
    Quotient psi(u) = phi0(u) / u, extended by 0 on |u| <= sigma.

    Raises:
        ConfigurationError: If sigma = 0 (psi is undefined at the origin)
    """
    if spec.sigma <= 0:
        raise ConfigurationError("psi requires sigma > 0")
    arr = np.asarray(u, dtype=float)
    phi0 = np.asarray(phi0_eval(spec, arr))
    active = np.abs(arr) > spec.sigma
    out = np.divide(phi0, arr, out=np.zeros_like(phi0), where=active)
    return _finish(out, arr.ndim == 0)
