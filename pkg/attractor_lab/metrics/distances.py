"""Distances between phase states and to balls of a more regular space."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.spatial.distance import cdist

from attractor_lab.errors import NumericalError, PreconditionError, UndefinedDistanceError
from attractor_lab.spectral.core import ModeGrid, PhaseState, phase_weights

MAX_ITERATIONS = 200


def flat_weights(grid: ModeGrid, r: float) -> np.ndarray:
    """Weights of the H^r product norm on the flattened (pos, vel) vector."""
    pos_weight, vel_weight = phase_weights(grid, r)
    return np.concatenate([pos_weight.ravel(), vel_weight.ravel()])


def flatten(x: PhaseState) -> np.ndarray:
    return np.concatenate([x.pos.coeffs.ravel(), x.vel.coeffs.ravel()])


def semidist(A: Sequence[PhaseState], B: Sequence[PhaseState], r: float = 0.0) -> float:
    """
    Hausdorff semidistance sup_{a in A} inf_{b in B} ||a - b||_{H^r}.

    Raises:
        UndefinedDistanceError: If B is empty
    """
    if len(B) == 0:
        raise UndefinedDistanceError("distance to an empty set is undefined")
    if len(A) == 0:
        return 0.0
    scale = np.sqrt(flat_weights(A[0].grid, r))
    XA = np.stack([flatten(a) * scale for a in A])
    XB = np.stack([flatten(b) * scale for b in B])
    return float(np.max(np.min(cdist(XA, XB), axis=1)))


@dataclass(frozen=True)
class BallProjection:
    point: np.ndarray
    distance: float
    multiplier: float


def project_to_weighted_ball(
    center: np.ndarray,
    base_weights: np.ndarray,
    ball_weights: np.ndarray,
    rho: float,
) -> BallProjection:
    """
    Nearest point, in the base-weighted norm, of {z : sum w_ball z^2 <= rho^2}.

    The minimizer is z = c / (1 + mu w_ball / w_base) with the multiplier
    mu >= 0 fixed by the constraint, found by bracketed root finding.

    Raises:
        PreconditionError: If rho < 0
        NumericalError: If the multiplier search does not converge
    """
    if rho < 0:
        raise PreconditionError(f"ball radius must be nonnegative, got {rho}")
    c = np.asarray(center, dtype=float)
    wb = np.asarray(base_weights, dtype=float)
    ws = np.asarray(ball_weights, dtype=float)

    if np.sum(ws * c**2) <= rho**2:
        return BallProjection(point=c.copy(), distance=0.0, multiplier=0.0)
    if rho == 0:
        return BallProjection(point=np.zeros_like(c), distance=float(np.sqrt(np.sum(wb * c**2))), multiplier=np.inf)

    ratio = ws / wb

    def excess(mu: float) -> float:
        return float(np.sum(ws * (c / (1.0 + mu * ratio)) ** 2)) - rho**2

    hi = 1.0
    for _ in range(MAX_ITERATIONS):
        if excess(hi) <= 0:
            break
        hi *= 2.0
    else:
        raise NumericalError("could not bracket the ball multiplier")

    mu, result = brentq(
        excess,
        0.0,
        hi,
        xtol=1e-300,
        rtol=4 * np.finfo(float).eps,
        maxiter=MAX_ITERATIONS,
        full_output=True,
        disp=False,
    )
    if not result.converged:
        raise NumericalError(f"ball multiplier search did not converge: {result.flag}")
    z = c / (1.0 + mu * ratio)
    return BallProjection(point=z, distance=float(np.sqrt(np.sum(wb * (c - z) ** 2))), multiplier=float(mu))


@dataclass(frozen=True)
class NormSpec:
    """Pair of norm orders: distances in H^{r_base}, balls in H^{r_ball}."""

    grid: ModeGrid
    r_base: float = 0.0
    r_ball: float = 0.25

    def __post_init__(self) -> None:
        if self.r_ball < self.r_base:
            raise PreconditionError(f"ball order {self.r_ball} must not be below base order {self.r_base}")

    @property
    def base_weights(self) -> np.ndarray:
        return flat_weights(self.grid, self.r_base)

    @property
    def ball_weights(self) -> np.ndarray:
        return flat_weights(self.grid, self.r_ball)


def dist_to_ball(x: PhaseState, rho: float, spec: NormSpec) -> float:
    """dist_{H^{r_base}}(x, B_{H^{r_ball}}(rho))."""
    return project_to_weighted_ball(flatten(x), spec.base_weights, spec.ball_weights, rho).distance
