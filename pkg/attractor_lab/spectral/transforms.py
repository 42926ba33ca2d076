"""Sine-series transforms between spectral coefficients and collocation values.

Collocation uses M = P*N interior points per axis, x_j = j L / (M + 1). With
P = 3 the pointwise product of up to five band-limited fields is recovered
exactly on the retained modes.
"""

from typing import Union

import numpy as np
from scipy.fft import dstn

from attractor_lab.errors import ConfigurationError
from attractor_lab.spectral.core import ModeGrid, SpectralField


def collocation_points(grid: ModeGrid) -> np.ndarray:
    """Interior collocation points along one axis."""
    m = grid.points_per_axis
    return np.arange(1, m + 1) * grid.length / (m + 1)


def quadrature_weight(grid: ModeGrid) -> float:
    """Per-axis trapezoid weight h = L / (M + 1)."""
    return grid.length / (grid.points_per_axis + 1)


def synthesize(coeffs: np.ndarray, grid: ModeGrid) -> np.ndarray:
    """
    Evaluate a coefficient array on the collocation grid.

    Args:
        coeffs: Array of shape grid.shape
        grid: Mode grid

    Returns:
        Values of shape (M,) * d
    """
    m = grid.points_per_axis
    padded = np.zeros((m,) * grid.dimension)
    padded[tuple(slice(0, grid.modes) for _ in range(grid.dimension))] = coeffs
    scale = (np.sqrt(2.0 / grid.length) / 2.0) ** grid.dimension
    return dstn(padded, type=1) * scale


def analyze(values: np.ndarray, grid: ModeGrid) -> np.ndarray:
    """
    Project collocation values onto the retained modes.

    Exact inverse of ``synthesize`` on band-limited data.

    Args:
        values: Array of shape (M,) * d
        grid: Mode grid

    Returns:
        Coefficient array of shape grid.shape
    """
    m = grid.points_per_axis
    if values.shape != (m,) * grid.dimension:
        raise ConfigurationError(
            f"collocation array shape {values.shape} does not match {(m,) * grid.dimension}"
        )
    scale = (quadrature_weight(grid) * np.sqrt(2.0 / grid.length) / 2.0) ** grid.dimension
    full = dstn(values, type=1) * scale
    return full[tuple(slice(0, grid.modes) for _ in range(grid.dimension))]


def to_physical(u: SpectralField) -> np.ndarray:
    """Collocation values of a spectral field."""
    return synthesize(u.coeffs, u.grid)


def to_spectral(values: np.ndarray, grid: ModeGrid) -> SpectralField:
    """Projection of collocation values onto the retained modes."""
    return SpectralField(grid, analyze(np.asarray(values, dtype=float), grid))


def evaluate_at(u: SpectralField, points: Union[float, np.ndarray]) -> np.ndarray:
    """
    Evaluate the sine series at arbitrary points.

    Args:
        u: Spectral field
        points: Shape (n,) in 1D or (n, d); a scalar is accepted in 1D

    Returns:
        Values of shape (n,)
    """
    grid = u.grid
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    if grid.dimension == 1 and pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] != grid.dimension:
        raise ConfigurationError(f"points must have shape (n, {grid.dimension})")

    k = np.arange(1, grid.modes + 1)
    amplitude = np.sqrt(2.0 / grid.length)
    bases = [amplitude * np.sin(np.pi * np.outer(pts[:, axis], k) / grid.length) for axis in range(grid.dimension)]
    if grid.dimension == 1:
        return bases[0] @ u.coeffs
    return np.einsum("ni,nj,nk,ijk->n", bases[0], bases[1], bases[2], u.coeffs)
