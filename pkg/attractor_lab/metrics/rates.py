"""Exponential rate fits C exp(-omega t) by least squares in log space."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from attractor_lab.errors import InsufficientDataError

MIN_POINTS = 3


@dataclass(frozen=True)
class RateFit:
    """
    Fitted C exp(-omega t).

    Attributes:
        C: Fitted prefactor
        omega: Fitted rate
        residual: Largest positive excess of the data over the fit
        n_points: Points used
        envelope_constant: Smallest C' with data <= C' exp(-omega t) on the fitted points
    """

    C: float
    omega: float
    residual: float
    n_points: int
    envelope_constant: float

    def __call__(self, t):
        return self.C * np.exp(-self.omega * np.asarray(t, dtype=float))

    def envelope(self, t):
        return self.envelope_constant * np.exp(-self.omega * np.asarray(t, dtype=float))

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "omega": self.omega,
            "residual": self.residual,
            "n_points": self.n_points,
            "envelope_constant": self.envelope_constant,
        }


def fit_rate(times: Sequence[float], values: Sequence[float]) -> RateFit:
    """
    Fit log(value) = log C - omega t.

    Non-finite and nonpositive points are dropped before the logarithm;
    exact zeros carry no rate information.

    Raises:
        InsufficientDataError: With fewer than three usable points or a single distinct time
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape:
        raise InsufficientDataError(f"times and values differ in shape: {t.shape} vs {v.shape}")
    usable = np.isfinite(t) & np.isfinite(v) & (v > 0)
    t, v = t[usable], v[usable]
    if t.size < MIN_POINTS:
        raise InsufficientDataError(f"need at least {MIN_POINTS} usable points, got {t.size}")
    if np.unique(t).size < 2:
        raise InsufficientDataError("need at least two distinct times")

    slope, intercept = np.polyfit(t, np.log(v), 1)
    C, omega = float(np.exp(intercept)), float(-slope)
    fitted = C * np.exp(-omega * t)
    return RateFit(
        C=C,
        omega=omega,
        residual=float(max(0.0, np.max(v - fitted))),
        n_points=int(t.size),
        envelope_constant=float(C * np.max(v / fitted)),
    )
