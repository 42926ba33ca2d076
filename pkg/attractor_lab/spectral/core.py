"""Dirichlet-Laplacian eigenbasis on intervals and cubes.

A function is stored by its coefficients in the eigenbasis of A = -Delta with
homogeneous Dirichlet conditions on [0, L]^d. Eigenfunctions are normalized in
L^2, so the plain coefficient 2-norm is the L^2 norm and every fractional
power of A is a diagonal scaling by eigenvalues.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence, Tuple, Union

import numpy as np

from attractor_lab.errors import ConfigurationError, SpectralIndexError

MultiIndex = Union[int, Sequence[int]]


@dataclass(frozen=True)
class ModeGrid:
    """Truncated eigenbasis of the Dirichlet Laplacian on a box."""

    dimension: int = 1
    modes: int = 32
    length: float = 1.0
    padding: int = 3

    def __post_init__(self) -> None:
        if self.dimension not in (1, 3):
            raise ConfigurationError(f"dimension must be 1 or 3, got {self.dimension}")
        if int(self.modes) != self.modes or self.modes < 1:
            raise ConfigurationError(f"modes must be a positive integer, got {self.modes}")
        if not self.length > 0:
            raise ConfigurationError(f"length must be positive, got {self.length}")
        if int(self.padding) != self.padding or self.padding < 1:
            raise ConfigurationError(f"padding must be a positive integer, got {self.padding}")

    @property
    def shape(self) -> Tuple[int, ...]:
        """Shape of a coefficient array."""
        return (self.modes,) * self.dimension

    @property
    def points_per_axis(self) -> int:
        """Number of collocation points per axis (P * N)."""
        return self.padding * self.modes

    @property
    def wavenumber_scale(self) -> float:
        """The factor (pi / L)^2."""
        return (np.pi / self.length) ** 2

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues lambda_k = (pi/L)^2 |k|^2 for k in {1..N}^d, read-only."""
        k = np.arange(1, self.modes + 1, dtype=float)
        axes = np.meshgrid(*([k] * self.dimension), indexing="ij")
        lam = self.wavenumber_scale * sum(axis**2 for axis in axes)
        lam.setflags(write=False)
        return lam

    @property
    def lambda1(self) -> float:
        """First (smallest) eigenvalue d (pi/L)^2."""
        return self.dimension * self.wavenumber_scale

    @property
    def lambda_max(self) -> float:
        """Largest retained eigenvalue."""
        return self.dimension * self.wavenumber_scale * self.modes**2

    def multi_indices(self) -> Iterator[Tuple[int, ...]]:
        """Iterate over all 1-based multi-indices in storage order."""
        return itertools.product(range(1, self.modes + 1), repeat=self.dimension)

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "modes": self.modes,
            "length": self.length,
            "padding": self.padding,
        }


def _normalize_index(grid: ModeGrid, k: MultiIndex) -> Tuple[int, ...]:
    index = (k,) if np.isscalar(k) else tuple(k)
    if len(index) != grid.dimension:
        raise SpectralIndexError(
            f"multi-index {index} has {len(index)} entries, grid dimension is {grid.dimension}"
        )
    for entry in index:
        if int(entry) != entry or not 1 <= entry <= grid.modes:
            raise SpectralIndexError(f"multi-index {index} outside 1..{grid.modes}")
    return tuple(int(entry) for entry in index)


def eigenvalue(grid: ModeGrid, k: MultiIndex) -> float:
    """
    Eigenvalue of A for a 1-based multi-index.

    Args:
        grid: Mode grid
        k: Integer (1D) or sequence of integers

    Returns:
        (pi/L)^2 * sum(k_i^2)

    Raises:
        SpectralIndexError: If any index entry is outside 1..N
    """
    index = _normalize_index(grid, k)
    return grid.wavenumber_scale * float(sum(entry**2 for entry in index))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Coefficients of a function in the eigenbasis (immutable)."""

    grid: ModeGrid
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != self.grid.shape:
            raise ConfigurationError(
                f"coefficient shape {coeffs.shape} does not match grid shape {self.grid.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, grid: ModeGrid) -> "SpectralField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def basis(cls, grid: ModeGrid, k: MultiIndex, amplitude: float = 1.0) -> "SpectralField":
        """Field amplitude * e_k."""
        index = _normalize_index(grid, k)
        coeffs = np.zeros(grid.shape)
        coeffs[tuple(entry - 1 for entry in index)] = amplitude
        return cls(grid, coeffs)

    @classmethod
    def from_pairs(cls, grid: ModeGrid, pairs: Sequence) -> "SpectralField":
        """Build a field from (multi-index, coefficient) pairs; unlisted modes are zero."""
        coeffs = np.zeros(grid.shape)
        for index, value in pairs:
            normalized = _normalize_index(grid, index)
            coeffs[tuple(entry - 1 for entry in normalized)] += float(value)
        return cls(grid, coeffs)

    def to_pairs(self, include_zeros: bool = False) -> list:
        """Flat list of [multi-index, coefficient] pairs (JSON friendly)."""
        pairs = []
        for index in self.grid.multi_indices():
            value = float(self.coeffs[tuple(entry - 1 for entry in index)])
            if include_zeros or value != 0.0:
                pairs.append([list(index), value])
        return pairs

    def norm(self, r: float = 0.0) -> float:
        return norm_r(self, r)

    def _check_grid(self, other: "SpectralField") -> None:
        if other.grid != self.grid:
            raise ConfigurationError("fields live on different grids")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_grid(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_grid(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * float(scalar))

    __rmul__ = __mul__


def norm_r(u: SpectralField, r: float) -> float:
    """
    Norm ||u||_r = ||A^{r/2} u||.

    Args:
        u: Spectral field
        r: Any real order

    Returns:
        sqrt(sum_k lambda_k^r u_k^2)
    """
    weights = u.grid.eigenvalues ** float(r)
    return float(np.sqrt(np.sum(weights * u.coeffs**2)))


def inner_r(u: SpectralField, v: SpectralField, r: float = 0.0) -> float:
    """Inner product <u, v>_r = <A^{r/2} u, A^{r/2} v>."""
    u._check_grid(v)
    return float(np.sum(u.grid.eigenvalues ** float(r) * u.coeffs * v.coeffs))


def apply_A_power(u: SpectralField, p: float) -> SpectralField:
    """Apply A^p: coefficients scaled by lambda_k^p."""
    if p == 0:
        return u
    return SpectralField(u.grid, u.coeffs * u.grid.eigenvalues ** float(p))


@dataclass(frozen=True, eq=False)
class PhaseState:
    """State (u, u_t) in the product space H^{r+1} x H^r."""

    pos: SpectralField
    vel: SpectralField

    def __post_init__(self) -> None:
        if self.pos.grid != self.vel.grid:
            raise ConfigurationError("position and velocity live on different grids")

    @property
    def grid(self) -> ModeGrid:
        return self.pos.grid

    @classmethod
    def zeros(cls, grid: ModeGrid) -> "PhaseState":
        return cls(SpectralField.zeros(grid), SpectralField.zeros(grid))

    @classmethod
    def from_arrays(cls, grid: ModeGrid, pos: np.ndarray, vel: np.ndarray) -> "PhaseState":
        return cls(SpectralField(grid, pos), SpectralField(grid, vel))

    @classmethod
    def from_stacked(cls, grid: ModeGrid, stacked: np.ndarray) -> "PhaseState":
        """Inverse of ``as_array``."""
        return cls.from_arrays(grid, stacked[0], stacked[1])

    def as_array(self) -> np.ndarray:
        """Writable stacked copy with shape (2, *grid.shape)."""
        return np.stack([self.pos.coeffs, self.vel.coeffs])

    def norm(self, r: float = 0.0) -> float:
        return phase_norm(self, r)

    def to_dict(self) -> dict:
        return {"pos": self.pos.to_pairs(), "vel": self.vel.to_pairs()}

    @classmethod
    def from_dict(cls, grid: ModeGrid, data: dict) -> "PhaseState":
        """Inverse of ``to_dict``."""
        return cls(SpectralField.from_pairs(grid, data["pos"]), SpectralField.from_pairs(grid, data["vel"]))

    def __add__(self, other: "PhaseState") -> "PhaseState":
        return PhaseState(self.pos + other.pos, self.vel + other.vel)

    def __sub__(self, other: "PhaseState") -> "PhaseState":
        return PhaseState(self.pos - other.pos, self.vel - other.vel)

    def __neg__(self) -> "PhaseState":
        return PhaseState(-self.pos, -self.vel)

    def __mul__(self, scalar: float) -> "PhaseState":
        return PhaseState(self.pos * scalar, self.vel * scalar)

    __rmul__ = __mul__


def phase_norm(x: PhaseState, r: float = 0.0) -> float:
    """Norm in H^{r+1} x H^r: sqrt(||u||_{r+1}^2 + ||v||_r^2)."""
    return float(np.hypot(norm_r(x.pos, r + 1.0), norm_r(x.vel, r)))


def phase_weights(grid: ModeGrid, r: float) -> Tuple[np.ndarray, np.ndarray]:
    """Per-mode weights (lambda^{r+1}, lambda^r) of the H^r product norm."""
    lam = grid.eigenvalues
    return lam ** (float(r) + 1.0), lam ** float(r)


def stacked_norm(stacked: np.ndarray, grid: ModeGrid, r: float = 0.0) -> float:
    """Product-space norm of a stacked (2, *shape) coefficient array."""
    pos_weight, vel_weight = phase_weights(grid, r)
    return float(np.sqrt(np.sum(pos_weight * stacked[0] ** 2 + vel_weight * stacked[1] ** 2)))
