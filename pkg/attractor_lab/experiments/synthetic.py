"""Finite-dimensional operator families with known decay and growth functions.

Two kinds, both with V_x(t) y = e^{tA} y and U_x(t) z = e^{tA} z + zeta(t; x):

    affine   x' = A x + g, A = -a I + Omega (Omega skew), zeta = A^{-1}(e^{tA} - I) g
    bounded  x' = -a x + C b tanh(<w, x>) with <w, b> = 0, so <w, x(t)> = e^{-a t} <w, x>

Since e^{t Omega} is orthogonal, ||e^{tA}|| = e^{-a t} and ||zeta(t)|| <= C (1 - e^{-a t}) / a,
so alpha = beta = e^{-a t} and J = (C/a)(1 - e^{-a t}) hold exactly. An
adversarial family declares J smaller than the truth by a factor 1 + violation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from attractor_lab.certificates.functions import DecayFn, GrowthFn

AFFINE = "affine"
BOUNDED = "bounded"


def _random_unit(rng: np.random.Generator, dimension: int) -> np.ndarray:
    vector = rng.standard_normal(dimension)
    return vector / np.linalg.norm(vector)


@dataclass(frozen=True, eq=False)
class SyntheticFamily:
    """
    One operator family on R^m.

    Attributes:
        kind: "affine" or "bounded"
        rate: Decay rate a > 0
        rotation: Skew-symmetric Omega (zero for bounded families)
        forcing: g for affine families
        coupling: Unit direction b of the bounded nonlinearity
        witness: Direction w orthogonal to b
        strength: C, the bound on the source term
        inflation: Declared J = true J / inflation (1 for honest families)
    """

    kind: str
    rate: float
    rotation: np.ndarray
    forcing: np.ndarray
    coupling: np.ndarray
    witness: np.ndarray
    strength: float
    inflation: float = 1.0

    @classmethod
    def random(
        cls,
        rng: np.random.Generator,
        dimension: int,
        kind: str = AFFINE,
        zero_forcing: bool = False,
    ) -> "SyntheticFamily":
        rate = float(rng.uniform(0.3, 2.0))
        strength = 0.0 if zero_forcing else float(rng.uniform(0.2, 3.0))
        coupling = _random_unit(rng, dimension)
        witness = rng.standard_normal(dimension)
        witness = witness - witness.dot(coupling) * coupling
        witness = witness / np.linalg.norm(witness) * rng.uniform(0.5, 2.0)
        if kind == AFFINE:
            raw = rng.standard_normal((dimension, dimension))
            rotation = (raw - raw.T) * rng.uniform(0.0, 1.5) / 2.0
            forcing = strength * _random_unit(rng, dimension)
        else:
            rotation = np.zeros((dimension, dimension))
            forcing = np.zeros(dimension)
        return cls(
            kind=kind,
            rate=rate,
            rotation=rotation,
            forcing=forcing,
            coupling=coupling,
            witness=witness,
            strength=strength,
        )

    @classmethod
    def adversarial(cls, rng: np.random.Generator, dimension: int, violation: float) -> "SyntheticFamily":
        """Affine family without rotation whose declared J is too small by 1 + violation."""
        rate = float(rng.uniform(0.3, 2.0))
        strength = float(rng.uniform(0.2, 3.0))
        return cls(
            kind=AFFINE,
            rate=rate,
            rotation=np.zeros((dimension, dimension)),
            forcing=strength * _random_unit(rng, dimension),
            coupling=_random_unit(rng, dimension),
            witness=np.zeros(dimension),
            strength=strength,
            inflation=1.0 + violation,
        )

    @property
    def dimension(self) -> int:
        return self.forcing.size

    @property
    def generator(self) -> np.ndarray:
        return -self.rate * np.eye(self.dimension) + self.rotation

    def linear(self, t: float, y: np.ndarray) -> np.ndarray:
        return expm(t * self.generator) @ y

    def zeta(self, t: float, x: np.ndarray) -> np.ndarray:
        if self.strength == 0 or t == 0:
            return np.zeros(self.dimension)
        if self.kind == AFFINE:
            propagator = expm(t * self.generator)
            return np.linalg.solve(self.generator, (propagator - np.eye(self.dimension)) @ self.forcing)
        s0 = float(self.witness @ x)
        a = self.rate
        integral, _ = quad(lambda tau: np.exp(-a * (t - tau)) * np.tanh(s0 * np.exp(-a * tau)), 0.0, t)
        return self.strength * integral * self.coupling

    def S(self, x: np.ndarray, t: float) -> np.ndarray:
        return self.linear(t, x) + self.zeta(t, x)

    def advance(self, x: np.ndarray, y: np.ndarray, z: np.ndarray, t: float):
        return self.S(x, t), self.linear(t, y), self.linear(t, z) + self.zeta(t, x)

    def alpha(self) -> DecayFn:
        return DecayFn.exp_floor(1.0, self.rate, 0.0)

    def beta(self) -> DecayFn:
        return DecayFn.exp_floor(1.0, self.rate, 0.0)

    def true_growth(self) -> GrowthFn:
        return GrowthFn.saturating(self.strength / self.rate, self.rate, 0.0)

    def declared_growth(self) -> GrowthFn:
        return GrowthFn.saturating(self.strength / (self.rate * self.inflation), self.rate, 0.0)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "rate": self.rate,
            "strength": self.strength,
            "dimension": self.dimension,
            "inflation": self.inflation,
        }
