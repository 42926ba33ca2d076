"""Fit certificate functions to trajectory data.

Fitted functions are envelopes: after the shape is chosen by least squares
the amplitude is raised until every data point lies on or below the curve.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from attractor_lab.certificates.functions import DecayFn, GrowthFn
from attractor_lab.certificates.gronwall import gronwall_bound
from attractor_lab.errors import InsufficientDataError
from attractor_lab.metrics.rates import fit_rate
from attractor_lab.utils.logging_config import get_logger

logger = get_logger(__name__)

MIN_RATE = 1e-3
# exp(k/nu) above this overflows; the Gronwall conclusion is then vacuous.
MAX_EXPONENT = 700.0


def _as_arrays(times: Sequence[float], values: Sequence[float]):
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.size < 3:
        raise InsufficientDataError(f"need at least 3 matching samples, got {t.size}")
    return t, v


def fit_decay_envelope(times: Sequence[float], values: Sequence[float], tail_fraction: float = 0.25) -> DecayFn:
    """
    Fit a e^{-b t} dominating the data.

    b is the rate fitted on t >= tail_fraction * t_max; a = max(v e^{b t}).
    A nonpositive fitted rate, or a tail with fewer than three positive
    values, falls back to MIN_RATE.
    """
    t, v = _as_arrays(times, values)
    tail = t >= tail_fraction * t.max()
    if np.count_nonzero(tail) < 3:
        tail = np.ones_like(t, dtype=bool)
    try:
        rate = fit_rate(t[tail], v[tail]).omega
    except InsufficientDataError:
        logger.warning("decay fit has fewer than three positive points; using MIN_RATE")
        rate = MIN_RATE
    if rate <= 0:
        logger.warning(f"decay fit found nonpositive rate {rate:.4g}; using {MIN_RATE}")
        rate = MIN_RATE
    amplitude = float(np.max(v * np.exp(rate * t)))
    return DecayFn.exp_floor(amplitude, rate, 0.0)


def fit_growth_envelope(times: Sequence[float], values: Sequence[float]) -> GrowthFn:
    """
    Fit p (1 - e^{-q t}) + r dominating the running maximum of the data.

    r is the initial value, q = ln 2 / t_half where t_half is the first time
    the running maximum covers half of its total rise, and p is the smallest
    amplitude that dominates every point.
    """
    t, v = _as_arrays(times, values)
    envelope = np.maximum.accumulate(np.maximum(v, 0.0))
    r = float(envelope[0])
    rise = envelope - r
    if rise[-1] <= 0:
        return GrowthFn.saturating(0.0, 0.0, r)

    half = int(np.argmax(rise >= 0.5 * rise[-1]))
    t_half = float(t[half]) if t[half] > 0 else float(t[t > 0].min())
    q = np.log(2.0) / t_half
    shape = 1.0 - np.exp(-q * t)
    positive = shape > 0
    p = float(np.max(rise[positive] / shape[positive])) if np.any(positive) else 0.0
    return GrowthFn.saturating(p, q, r)


@dataclass(frozen=True)
class DifferentialFit:
    """
    Fitted premise dLambda/dt + eps Lambda <= k e^{-nu t} Lambda + J.

    Attributes:
        epsilon: Energy parameter used
        k, nu: Fitted transient coupling
        J: Constant source level (late-time positive part of the residual rate)
        max_violation: Largest relative excess of Lambda over the Gronwall bound
        bounded: False when k/nu is too large for a finite bound
    """

    epsilon: float
    k: float
    nu: float
    J: float
    max_violation: float
    bounded: bool

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "k": self.k,
            "nu": self.nu,
            "J": self.J,
            "max_violation": self.max_violation,
            "bounded": self.bounded,
        }


def fit_differential_inequality(
    times: Sequence[float],
    energy: Sequence[float],
    epsilon: float,
    source: Optional[float] = None,
) -> DifferentialFit:
    """
    Fit (k, nu, J) to an energy curve and check the Gronwall conclusion.

    The rate r(t) = dLambda/dt + eps Lambda is formed by finite differences.
    J is the largest positive rate on the late half of the record (or
    ``source`` if given), and k e^{-nu t} dominates (r - J)^+ / Lambda.

    Returns:
        DifferentialFit whose max_violation is the largest relative excess of
        Lambda(t) over exp(k/nu) (exp(-eps t) Lambda(0) + J / eps)
    """
    t, lam = _as_arrays(times, energy)
    rate = np.gradient(lam, t) + epsilon * lam

    late = t >= 0.5 * t.max()
    if source is None:
        source = float(max(0.0, np.max(rate[late])))

    scale = np.where(lam > 0, lam, np.inf)
    excess = np.clip(rate - source, 0.0, None) / scale
    if np.max(excess) <= 0:
        k, nu = 0.0, 1.0
    else:
        usable = excess > 0
        nu = 1.0
        if np.count_nonzero(usable) >= 3:
            try:
                nu = max(fit_rate(t[usable], excess[usable]).omega, MIN_RATE)
            except InsufficientDataError:
                nu = 1.0
        k = float(np.max(excess * np.exp(nu * t)))

    if k / nu > MAX_EXPONENT:
        logger.warning(f"fitted k/nu = {k / nu:.3g} is too large for a finite Gronwall bound")
        return DifferentialFit(epsilon=epsilon, k=k, nu=nu, J=source, max_violation=0.0, bounded=False)

    bound = np.asarray(gronwall_bound(float(lam[0]), epsilon, nu, k, lambda s: np.full_like(s, source), t))
    positive = bound > 0
    violation = 0.0
    if np.any(positive):
        violation = float(max(0.0, np.max((lam[positive] - bound[positive]) / bound[positive])))
    return DifferentialFit(epsilon=epsilon, k=k, nu=nu, J=source, max_violation=violation, bounded=True)
