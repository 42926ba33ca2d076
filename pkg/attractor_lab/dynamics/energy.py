"""Energy functionals for the V- and U-components.

    Lambda0(eta)  = ||eta||_H^2 + eps ||v||_1^2 + 2 eps <v_t, v>
    Lambda1(zeta) = ||zeta||_{H^{1/4}}^2 + eps ||w||_{5/4}^2 + 2 eps <w_t, w>_{1/4}

Both are equivalent to the squared norms once eps <= (1 - theta) sqrt(lambda_1).
"""

import math
from typing import Tuple

import numpy as np

from attractor_lab.errors import ConfigurationError
from attractor_lab.spectral.core import ModeGrid, PhaseState

DEFAULT_THETA = 0.5


def quadratic_form(pos: np.ndarray, vel: np.ndarray, eigenvalues: np.ndarray, epsilon: float, r: float) -> float:
    """sum lambda^r [(1 + eps) lambda pos^2 + vel^2 + 2 eps pos vel]."""
    weight = eigenvalues ** float(r)
    return float(np.sum(weight * ((1.0 + epsilon) * eigenvalues * pos**2 + vel**2 + 2.0 * epsilon * pos * vel)))


def lambda0(eta: PhaseState, epsilon: float) -> float:
    return quadratic_form(eta.pos.coeffs, eta.vel.coeffs, eta.grid.eigenvalues, epsilon, 0.0)


def lambda1(zeta: PhaseState, epsilon: float) -> float:
    return quadratic_form(zeta.pos.coeffs, zeta.vel.coeffs, zeta.grid.eigenvalues, epsilon, 0.25)


def energy_equivalence(epsilon: float, first_eigenvalue: float) -> Tuple[float, float]:
    """
    Constants c1, c2 with c1 ||x||^2 <= Lambda(x) <= c2 ||x||^2.

    Per mode the form has matrix [[(1+eps) lam, eps], [eps, 1]] in the
    coordinates (u, v); relative to diag(lam, 1) its extreme eigenvalues are
    1 + eps/2 -/+ eps sqrt(1/4 + 1/lam), which is extremal at lam = lambda_1.
    """
    spread = epsilon * math.sqrt(0.25 + 1.0 / first_eigenvalue)
    return 1.0 + epsilon / 2.0 - spread, 1.0 + epsilon / 2.0 + spread


def max_energy_epsilon(first_eigenvalue: float, theta: float = DEFAULT_THETA) -> float:
    return (1.0 - theta) * math.sqrt(first_eigenvalue)


def check_energy_positivity(epsilon: float, grid: ModeGrid, theta: float = DEFAULT_THETA) -> None:
    """
    Raises:
        ConfigurationError: If eps is outside (0, 1) or above (1 - theta) sqrt(lambda_1)
    """
    if not 0 < epsilon < 1:
        raise ConfigurationError(f"energy epsilon must lie in (0, 1), got {epsilon}")
    bound = max_energy_epsilon(grid.lambda1, theta)
    if epsilon > bound:
        raise ConfigurationError(
            f"energy epsilon {epsilon} exceeds (1 - theta) sqrt(lambda_1) = {bound:.6g}"
        )
    c1, _ = energy_equivalence(epsilon, grid.lambda1)
    if c1 <= 0:
        raise ConfigurationError(f"energy functional not coercive for epsilon={epsilon}")
