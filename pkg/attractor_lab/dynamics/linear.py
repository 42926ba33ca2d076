"""Exact per-mode propagator of the linear strongly damped wave equation.

Each mode obeys u'' + lambda u' + lambda u = 0. Writing M = [[0, 1],
[-lambda, -lambda]], the propagator is E(t) = a(t) I + b(t) M with (a, b)
taken from whichever closed form is stable for the root structure of
mu^2 + lambda mu + lambda = 0.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from attractor_lab.errors import ConfigurationError
from attractor_lab.spectral.core import ModeGrid, PhaseState

# Eigenvalues closer than this to 4 use the double-root formula.
DOUBLE_ROOT_TOL = 1e-12


@dataclass(frozen=True)
class LinearPropagator:
    """Entries of E(t) per mode, each with the eigenvalue array's shape."""

    e11: np.ndarray
    e12: np.ndarray
    e21: np.ndarray
    e22: np.ndarray
    t: float

    def apply(self, pos: np.ndarray, vel: np.ndarray):
        return self.e11 * pos + self.e12 * vel, self.e21 * pos + self.e22 * vel


def _coefficients(lam: np.ndarray, t: float):
    a = np.empty_like(lam)
    b = np.empty_like(lam)
    disc = lam * lam - 4.0 * lam
    double = np.abs(lam - 4.0) <= DOUBLE_ROOT_TOL
    real = (disc > 0) & ~double
    cplx = (disc < 0) & ~double

    if np.any(real):
        lr = lam[real]
        s = np.sqrt(disc[real])
        mu_plus = -2.0 * lr / (lr + s)  # -(l - s)/2 without cancellation
        mu_minus = -(lr + s) / 2.0
        e_plus = np.exp(mu_plus * t)
        e_minus = np.exp(mu_minus * t)
        gap = mu_plus - mu_minus
        a[real] = (mu_plus * e_minus - mu_minus * e_plus) / gap
        b[real] = (e_plus - e_minus) / gap

    if np.any(cplx):
        lc = lam[cplx]
        omega = np.sqrt(-disc[cplx]) / 2.0
        envelope = np.exp(-lc * t / 2.0)
        sinc = np.sin(omega * t) / omega
        a[cplx] = envelope * (np.cos(omega * t) + lc / 2.0 * sinc)
        b[cplx] = envelope * sinc

    if np.any(double):
        decay = np.exp(-2.0 * t)
        a[double] = decay * (1.0 + 2.0 * t)
        b[double] = t * decay

    return a, b


def linear_propagator(eigenvalues: np.ndarray, t: float) -> LinearPropagator:
    """
    Exact propagator E(t) for every mode.

    Args:
        eigenvalues: Positive eigenvalues (any shape)
        t: Time, t >= 0

    Returns:
        LinearPropagator with e11 = a, e12 = b, e21 = -lambda b, e22 = a - lambda b
    """
    if t < 0:
        raise ConfigurationError(f"propagator time must be nonnegative, got {t}")
    lam = np.asarray(eigenvalues, dtype=float)
    a, b = _coefficients(lam.copy(), float(t))
    return LinearPropagator(e11=a, e12=b, e21=-lam * b, e22=a - lam * b, t=float(t))


def slow_decay_rate(eigenvalues: np.ndarray) -> np.ndarray:
    """-max Re(mu) per mode: lambda/2 below 4, 2 lambda / (lambda + sqrt(lambda^2 - 4 lambda)) above."""
    lam = np.asarray(eigenvalues, dtype=float)
    disc = np.clip(lam * lam - 4.0 * lam, 0.0, None)
    return np.where(lam < 4.0, lam / 2.0, 2.0 * lam / (lam + np.sqrt(disc)))


def step_linear(state: PhaseState, dt: float) -> PhaseState:
    """Advance the unforced linear equation by dt."""
    prop = linear_propagator(state.grid.eigenvalues, dt)
    pos, vel = prop.apply(state.pos.coeffs, state.vel.coeffs)
    return PhaseState.from_arrays(state.grid, pos, vel)


@dataclass(frozen=True)
class LinearDecay:
    """Constants with ||L(t) x||_H <= M exp(-delta t) ||x||_H."""

    M: float
    delta: float

    def __call__(self, t):
        return self.M * np.exp(-self.delta * np.asarray(t, dtype=float))

    def to_dict(self) -> dict:
        return {"M": self.M, "delta": self.delta}


def _largest_singular_value(m11, m12, m21, m22) -> np.ndarray:
    frob = m11**2 + m12**2 + m21**2 + m22**2
    det = m11 * m22 - m12 * m21
    return np.sqrt((frob + np.sqrt(np.clip(frob**2 - 4.0 * det**2, 0.0, None))) / 2.0)


def linear_decay_constants(grid: ModeGrid, times: Optional[np.ndarray] = None) -> LinearDecay:
    """
    Decay constants of the linear semigroup in H = H^1 x L^2.

    delta is the slowest modal rate. M is the largest sampled value of
    exp(delta t) ||D E(t) D^{-1}||_2 with D = diag(sqrt(lambda), 1), which is
    the per-mode operator norm in H.

    Args:
        grid: Mode grid
        times: Sample times (default: 4001 points on [0, 12/delta])

    Returns:
        LinearDecay(M, delta)
    """
    lam = np.unique(grid.eigenvalues)
    delta = float(np.min(slow_decay_rate(lam)))
    if times is None:
        times = np.linspace(0.0, 12.0 / delta, 4001)

    root = np.sqrt(lam)
    worst = 1.0
    for t in np.asarray(times, dtype=float):
        prop = linear_propagator(lam, t)
        sigma = _largest_singular_value(prop.e11, prop.e12 * root, prop.e21 / root, prop.e22)
        worst = max(worst, float(np.max(sigma)) * np.exp(delta * t))
    return LinearDecay(M=worst, delta=delta)
