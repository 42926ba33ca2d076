"""Gronwall-type bound for d/dt Lambda + eps Lambda <= k exp(-nu t) Lambda + J(t).

Any nonnegative solution satisfies

    Lambda(t) <= exp(k/nu) exp(-eps t) Lambda(0) + exp(k/nu) J(t) / eps

for nondecreasing J.
"""

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.integrate import solve_ivp

from attractor_lab.certificates.functions import GrowthFn
from attractor_lab.errors import NumericalError, PreconditionError

ArrayLike = Union[float, np.ndarray]
GrowthLike = Union[GrowthFn, Callable[[ArrayLike], ArrayLike]]


def _check(epsilon: float, nu: float, k: float, lambda_zero: float) -> None:
    if not epsilon > 0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    if not nu > 0:
        raise PreconditionError(f"nu must be positive, got {nu}")
    if k < 0:
        raise PreconditionError(f"k must be nonnegative, got {k}")
    if lambda_zero < 0:
        raise PreconditionError(f"Lambda(0) must be nonnegative, got {lambda_zero}")


def gronwall_bound(lambda_zero: float, epsilon: float, nu: float, k: float, J: GrowthLike, t: ArrayLike) -> ArrayLike:
    """
    Evaluate exp(k/nu) (exp(-eps t) Lambda(0) + J(t) / eps).

    Examples:
        k = 0, J = 0 gives Lambda(0) exp(-eps t).
    """
    _check(epsilon, nu, k, lambda_zero)
    arr = np.asarray(t, dtype=float)
    factor = np.exp(k / nu)
    out = factor * (np.exp(-epsilon * arr) * lambda_zero + np.asarray(J(arr)) / epsilon)
    return float(out) if arr.ndim == 0 else out


@dataclass
class GronwallReport:
    times: np.ndarray
    solution: np.ndarray
    bound: np.ndarray
    max_ratio: float
    passed: bool

    def to_dict(self) -> dict:
        return {"max_ratio": self.max_ratio, "passed": self.passed, "points": int(self.times.size)}


def gronwall_verify(
    lambda_zero: float,
    epsilon: float,
    nu: float,
    k: float,
    J: GrowthLike,
    t_final: float = 10.0,
    points: int = 201,
    rtol: float = 1e-9,
) -> GronwallReport:
    """
    Integrate the equality case and compare it to gronwall_bound.

    The ODE Lambda' = -eps Lambda + k exp(-nu t) Lambda + J(t) is solved with
    an 8th-order Runge-Kutta scheme at rtol 1e-12.

    Returns:
        GronwallReport with passed = solution <= bound (1 + rtol) everywhere
    """
    _check(epsilon, nu, k, lambda_zero)
    times = np.linspace(0.0, t_final, points)

    def rhs(t, y):
        return [(-epsilon + k * np.exp(-nu * t)) * y[0] + float(J(t))]

    sol = solve_ivp(
        rhs,
        (0.0, t_final),
        [lambda_zero],
        method="DOP853",
        t_eval=times,
        rtol=1e-12,
        atol=1e-14 * max(1.0, lambda_zero),
    )
    if not sol.success:
        raise NumericalError(f"reference integration failed: {sol.message}")

    solution = sol.y[0]
    bound = np.asarray(gronwall_bound(lambda_zero, epsilon, nu, k, J, times))
    positive = bound > 0
    ratio = np.zeros_like(bound)
    ratio[positive] = solution[positive] / bound[positive]
    passed = bool(np.all(solution <= bound * (1.0 + rtol) + 1e-300))
    return GronwallReport(
        times=times,
        solution=solution,
        bound=bound,
        max_ratio=float(np.max(ratio)) if ratio.size else 0.0,
        passed=passed,
    )
