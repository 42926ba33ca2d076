"""Seeded sampling of ensembles in H^r balls."""

from typing import Tuple

import numpy as np

from attractor_lab.errors import PreconditionError
from attractor_lab.spectral.core import ModeGrid, PhaseState


def sample_ball(grid: ModeGrid, radius: float, r: float = 0.0, count: int = 1, seed: int = 0) -> Tuple[PhaseState, ...]:
    """
    Draw ``count`` states with ||x||_{H^r} <= radius.

    Modal energy follows the profile lambda_1 / lambda_k, each draw is
    normalized and rescaled to a radius uniform in [0, radius).

    Args:
        grid: Mode grid
        radius: Ball radius (>= 0)
        r: Norm order of the ball
        count: Number of members
        seed: Seed for numpy's default_rng

    Returns:
        Tuple of PhaseState, deterministic in (grid, radius, r, count, seed)
    """
    if radius < 0:
        raise PreconditionError(f"radius must be nonnegative, got {radius}")
    if count < 1:
        raise PreconditionError(f"count must be positive, got {count}")

    rng = np.random.default_rng(seed)
    lam = grid.eigenvalues
    profile = np.sqrt(grid.lambda1 / lam)
    pos_scale = profile * lam ** (-(r + 1.0) / 2.0)
    vel_scale = profile * lam ** (-r / 2.0)

    members = []
    while len(members) < count:
        x = PhaseState.from_arrays(
            grid,
            rng.standard_normal(grid.shape) * pos_scale,
            rng.standard_normal(grid.shape) * vel_scale,
        )
        size = x.norm(r)
        if size == 0:
            continue
        members.append(x * (radius * rng.uniform() / size))
    return tuple(members)
