"""Run configuration documents (JSON) validated with Pydantic."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from attractor_lab.dynamics.semigroup import EvolutionConfig
from attractor_lab.errors import ConfigurationError, SpectralIndexError
from attractor_lab.nonlinearity.phi import CATALOG, PhiSpec
from attractor_lab.spectral.core import ModeGrid, SpectralField

ExperimentId = Literal["E1", "E2", "E3", "E4"]

# Fields that change where results go or how fast they are computed, not what they are.
HASH_EXCLUDED = {"output_dir", "workers"}


class GridConfig(BaseModel):
    """Mode grid parameters."""

    model_config = ConfigDict(extra="forbid")

    dimension: Literal[1, 3] = 1
    modes: int = Field(default=32, ge=1)
    length: float = Field(default=1.0, gt=0)
    padding: int = Field(default=3, ge=1)

    def build(self) -> ModeGrid:
        return ModeGrid(dimension=self.dimension, modes=self.modes, length=self.length, padding=self.padding)


class PhiConfig(BaseModel):
    """Nonlinearity: a catalog name or explicit odd power-series coefficients."""

    model_config = ConfigDict(extra="forbid")

    catalog: Optional[str] = None
    coefficients: Optional[List[float]] = None
    sigma: float = Field(default=0.0, ge=0)
    lambda_shift: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def check_source(self) -> "PhiConfig":
        if (self.catalog is None) == (self.coefficients is None):
            raise ValueError("give exactly one of 'catalog' or 'coefficients'")
        if self.catalog is not None and self.catalog not in CATALOG:
            raise ValueError(f"unknown catalog entry '{self.catalog}', choose from {sorted(CATALOG)}")
        return self

    def build(self) -> PhiSpec:
        if self.catalog is not None:
            return PhiSpec.from_catalog(self.catalog, sigma=self.sigma, lambda_shift=self.lambda_shift)
        return PhiSpec.from_coefficients(self.coefficients, sigma=self.sigma, lambda_shift=self.lambda_shift)


class ForcingTerm(BaseModel):
    """One forcing coefficient f_k."""

    model_config = ConfigDict(extra="forbid")

    index: List[int]
    value: float


class SyntheticConfig(BaseModel):
    """Synthetic operator families for E1."""

    model_config = ConfigDict(extra="forbid")

    families: int = Field(default=50, ge=1)
    adversarial: int = Field(default=10, ge=0)
    violation: float = Field(default=0.1, ge=0.1)
    dimension: int = Field(default=4, ge=2)
    samples: int = Field(default=4, ge=1)
    n_max: int = Field(default=20, ge=1)
    include_zero_forcing: bool = True


class RunConfig(BaseModel):
    """
    One experiment run.

    ``seed`` is mandatory. ``t_star`` is a positive number or "auto" (smallest
    time meeting the margin policy).
    """

    model_config = ConfigDict(extra="forbid")

    experiment: ExperimentId
    seed: int = Field(ge=0, lt=2**64)
    grid: GridConfig = Field(default_factory=GridConfig)
    phi: PhiConfig = Field(default_factory=lambda: PhiConfig(catalog="zero"))
    forcing: List[ForcingTerm] = Field(default_factory=list)
    r0: float = Field(default=1.0, gt=0)
    ensemble_size: int = Field(default=8, ge=0)
    dt: float = Field(default=0.01, gt=0)
    t_final: float = Field(default=20.0, gt=0)
    stride: int = Field(default=10, ge=1)
    epsilon_energy: float = Field(default=0.05, gt=0, lt=1)
    t_star: Union[float, Literal["auto"]] = "auto"
    t_star_margin: float = Field(default=0.5, gt=0, lt=1)
    fit_start_fraction: float = Field(default=0.25, ge=0, lt=1)
    directions_per_member: int = Field(default=1, ge=1)
    iteration_members: int = Field(default=2, ge=0)
    iteration_steps: int = Field(default=10, ge=0)
    radius_factors: List[float] = Field(default_factory=lambda: [1.0, 2.0, 4.0])
    target_radius: Optional[float] = Field(default=None, gt=0)
    synthetic: SyntheticConfig = Field(default_factory=SyntheticConfig)
    output_dir: Optional[Path] = None
    workers: int = Field(default=1, ge=1, le=64)

    @field_validator("t_star")
    @classmethod
    def check_t_star(cls, v: Union[float, str]) -> Union[float, str]:
        if v != "auto" and not v > 0:
            raise ValueError("t_star must be positive or 'auto'")
        return v

    @field_validator("radius_factors")
    @classmethod
    def check_factors(cls, v: List[float]) -> List[float]:
        if not v or any(f < 1 for f in v):
            raise ValueError("radius_factors must be a nonempty list of values >= 1")
        return sorted(v)

    @model_validator(mode="after")
    def check_components(self) -> "RunConfig":
        grid = self.build_grid()
        try:
            self.build_forcing(grid)
        except SpectralIndexError as e:
            raise ValueError(f"forcing: {e}") from e
        if self.experiment != "E1":
            self.evolution_config()
        if self.experiment in ("E3", "E4") and self.phi.sigma <= 0:
            raise ValueError("E3 and E4 use the V/U split, which needs phi.sigma > 0")
        return self

    @classmethod
    def from_file(cls, path: Path) -> "RunConfig":
        """
        Load and validate a JSON run configuration.

        Raises:
            ConfigurationError: If the file is missing or not valid JSON
            pydantic.ValidationError: If the document does not match the schema
        """
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"cannot read run configuration {path}: {e}") from e
        return cls.model_validate(data)

    def build_grid(self) -> ModeGrid:
        return self.grid.build()

    def build_phi(self) -> PhiSpec:
        return self.phi.build()

    def build_forcing(self, grid: Optional[ModeGrid] = None) -> SpectralField:
        grid = grid or self.build_grid()
        return SpectralField.from_pairs(grid, [(term.index, term.value) for term in self.forcing])

    def evolution_config(self, radius: Optional[float] = None, dt: Optional[float] = None) -> EvolutionConfig:
        """EvolutionConfig for data in B_H(radius) (default r0)."""
        grid = self.build_grid()
        return EvolutionConfig(
            grid=grid,
            phi=self.build_phi(),
            forcing=self.build_forcing(grid),
            dt=self.dt if dt is None else dt,
            t_final=self.t_final,
            epsilon=self.epsilon_energy,
            stride=self.stride,
            ball_radius=self.r0 if radius is None else radius,
        )

    def with_seed(self, seed: int) -> "RunConfig":
        return self.model_copy(update={"seed": seed})

    def canonical_json(self) -> str:
        data = self.model_dump(mode="json", exclude=HASH_EXCLUDED)
        return json.dumps(data, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON (output location and worker count excluded)."""
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()
