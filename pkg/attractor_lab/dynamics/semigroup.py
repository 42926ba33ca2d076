"""Spectral Galerkin evolution of the strongly damped wave equation.

    u_tt - Delta u_t - Delta u + phi(u) = f   on a box, Dirichlet conditions.

The flow S(t) is split two ways, both sharing the nonlinearity evaluated on
the full state u:

    hat split   S(t)x = hat_v(t) + hat_w(t)
        hat_v_tt + A hat_v_t + A hat_v + phi0(hat_v) = 0,        hat_v(0) = x
        hat_w_tt + A hat_w_t + A hat_w = f - phi(u) + phi0(hat_v), hat_w(0) = 0

    V/U split   S(t)x = v(t) + w(t), with x = y + z
        v_tt + A v_t + A v + psi(hat_v) v = 0,                  v(0) = y
        w_tt + A w_t + A w = f - phi(u) + psi(hat_v) v,         w(0) = z

Each step is a Strang splitting: half a step of the exact affine linear
propagator, a nonlinear velocity kick computed on the collocation grid, and
another half step. Kicks of the split components are built from the same
projected arrays, so the sum identities hold to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional

import numpy as np

from attractor_lab.dynamics.energy import check_energy_positivity, quadratic_form
from attractor_lab.dynamics.linear import linear_propagator
from attractor_lab.errors import (
    ConfigurationError,
    ConsistencyError,
    InstabilityError,
    PreconditionError,
)
from attractor_lab.nonlinearity.phi import PhiSpec, phi0_eval, phi_eval, phi_prime_eval, psi_eval
from attractor_lab.spectral.core import ModeGrid, PhaseState, SpectralField, stacked_norm
from attractor_lab.spectral.transforms import analyze, synthesize
from attractor_lab.utils.logging_config import get_logger

logger = get_logger(__name__)

FULL = "full"
HAT_V = "hat_v"
HAT_W = "hat_w"
V = "v"
W = "w"
FORCED_COMPONENTS = frozenset({FULL, HAT_W, W})

DIVERGENCE_THRESHOLD = 1e6
IDENTITY_TOLERANCE = 1e-6
SPLIT_TOLERANCE = 1e-12

# Norm labels used in trajectory records.
NORM_ORDERS = {"H": 0.0, "H_quarter": 0.25, "H1": 1.0}


def equilibrium_norm(forcing: SpectralField) -> float:
    """H-norm of the linear equilibrium (A^{-1} f, 0)."""
    lam = forcing.grid.eigenvalues
    return float(np.sqrt(np.sum(forcing.coeffs**2 / lam)))


def dt_max(grid: ModeGrid, phi: PhiSpec, radius: float) -> float:
    """
    Largest admissible step for states of H-norm at most ``radius``.

    Uses ||u||_inf <= (2/L)^{d/2} sqrt(sum 1/lambda_k) ||u||_1 and returns
    0.5 / max(1, Lip phi on [-a, a]).
    """
    sup_bound = (2.0 / grid.length) ** (grid.dimension / 2.0) * np.sqrt(np.sum(1.0 / grid.eigenvalues)) * radius
    samples = np.linspace(-sup_bound, sup_bound, 2001)
    lipschitz = float(np.max(np.abs(phi_prime_eval(phi, samples))))
    return 0.5 / max(1.0, lipschitz)


@dataclass(frozen=True, eq=False)
class EvolutionConfig:
    """
    Parameters of one Galerkin evolution.

    Attributes:
        grid: Mode grid
        phi: Nonlinearity
        forcing: Time-independent forcing f (default zero)
        dt: Time step
        t_final: Final time
        epsilon: Energy-functional parameter used for Lambda0/Lambda1 records
        stride: Record every ``stride`` steps (the final step is always recorded)
        ball_radius: Radius of the H-ball initial data are drawn from
    """

    grid: ModeGrid
    phi: PhiSpec
    forcing: Optional[SpectralField] = None
    dt: float = 0.01
    t_final: float = 10.0
    epsilon: float = 0.05
    stride: int = 10
    ball_radius: float = 1.0

    def __post_init__(self) -> None:
        if self.forcing is None:
            object.__setattr__(self, "forcing", SpectralField.zeros(self.grid))
        elif self.forcing.grid != self.grid:
            raise ConfigurationError("forcing lives on a different grid")
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if not self.t_final > 0:
            raise ConfigurationError(f"t_final must be positive, got {self.t_final}")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ConfigurationError(f"stride must be a positive integer, got {self.stride}")
        if self.ball_radius < 0:
            raise ConfigurationError(f"ball_radius must be nonnegative, got {self.ball_radius}")
        self.phi.check_shift(self.grid.lambda1)
        check_energy_positivity(self.epsilon, self.grid)

        limit = self.dt_limit
        if self.dt > limit:
            raise ConfigurationError(f"dt={self.dt} exceeds dt_max={limit:.4g} for this ball and nonlinearity")

    @property
    def dt_limit(self) -> float:
        return dt_max(self.grid, self.phi, self.ball_radius + equilibrium_norm(self.forcing))

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_final / self.dt)))

    def with_horizon(self, t_final: float, stride: Optional[int] = None) -> "EvolutionConfig":
        return replace(self, t_final=t_final, stride=self.stride if stride is None else stride)


@dataclass(frozen=True)
class DecomposedState:
    """Snapshot of every tracked component at one time."""

    t: float
    full: PhaseState
    hat_v: Optional[PhaseState] = None
    hat_w: Optional[PhaseState] = None
    v: Optional[PhaseState] = None
    w: Optional[PhaseState] = None

    def component(self, name: str) -> PhaseState:
        state = getattr(self, name)
        if state is None:
            raise KeyError(f"component '{name}' was not tracked")
        return state


@dataclass
class TrajectoryRecord:
    """Recorded states of one evolution."""

    grid: ModeGrid
    epsilon: float
    times: np.ndarray
    states: Dict[str, List[PhaseState]]
    identity_residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def components(self) -> tuple:
        return tuple(self.states)

    def final(self, component: str = FULL) -> PhaseState:
        return self.states[component][-1]

    def norm_series(self, component: str, r: float = 0.0) -> np.ndarray:
        return np.array([state.norm(r) for state in self.states[component]])

    def energy_series(self, component: str, order: float = 0.0) -> np.ndarray:
        """Lambda0 (order 0) or Lambda1 (order 1/4) along the record."""
        lam = self.grid.eigenvalues
        return np.array(
            [quadratic_form(s.pos.coeffs, s.vel.coeffs, lam, self.epsilon, order) for s in self.states[component]]
        )

    def snapshot(self, index: int) -> DecomposedState:
        kwargs = {name: series[index] for name, series in self.states.items()}
        return DecomposedState(t=float(self.times[index]), **kwargs)

    def to_json_records(self, member: Optional[int] = None) -> List[dict]:
        """One record per (time, component) for trajectories.jsonl."""
        lam = self.grid.eigenvalues
        records = []
        for index, t in enumerate(self.times):
            residual = float(self.identity_residuals[index]) if self.identity_residuals.size else 0.0
            for name, series in self.states.items():
                state = series[index]
                pos, vel = state.pos.coeffs, state.vel.coeffs
                records.append(
                    {
                        "t": float(t),
                        "member": member,
                        "component": name,
                        "norms": {label: state.norm(r) for label, r in NORM_ORDERS.items()},
                        "Lambda0": quadratic_form(pos, vel, lam, self.epsilon, 0.0),
                        "Lambda1": quadratic_form(pos, vel, lam, self.epsilon, 0.25),
                        "residual": residual,
                        "state": state.to_dict(),
                    }
                )
        return records


class _SplitStepper:
    """Strang step for a set of coupled components (stacked coefficient arrays)."""

    def __init__(self, config: EvolutionConfig, linear_split: bool = False):
        self.config = config
        self.grid = config.grid
        self.linear_split = linear_split
        self._half = linear_propagator(self.grid.eigenvalues, config.dt / 2.0)
        self._equilibrium = config.forcing.coeffs / self.grid.eigenvalues

    def _propagate(self, name: str, x: np.ndarray) -> np.ndarray:
        pos, vel = x[0], x[1]
        forced = name in FORCED_COMPONENTS
        if forced:
            pos = pos - self._equilibrium
        new_pos, new_vel = self._half.apply(pos, vel)
        if forced:
            new_pos = new_pos + self._equilibrium
        return np.stack([new_pos, new_vel])

    def _project(self, values: np.ndarray) -> np.ndarray:
        return analyze(values, self.grid)

    def _kicks(self, states: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
        phi = self.config.phi
        u = synthesize(states[FULL][0], self.grid)
        phi_u = self._project(phi_eval(phi, u))
        kicks = {FULL: -phi_u}
        if HAT_V not in states:
            return kicks

        zero = np.zeros(self.grid.shape)
        hat_v = synthesize(states[HAT_V][0], self.grid)
        phi0_hat_v = zero if self.linear_split else self._project(phi0_eval(phi, hat_v))
        kicks[HAT_V] = -phi0_hat_v
        kicks[HAT_W] = -phi_u + phi0_hat_v

        if V in states:
            v = synthesize(states[V][0], self.grid)
            coupling = zero if self.linear_split else self._project(v * psi_eval(phi, hat_v))
            kicks[V] = -coupling
            kicks[W] = -phi_u + coupling
        return kicks

    def step(self, states: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
        half = {name: self._propagate(name, x) for name, x in states.items()}
        kicks = self._kicks(half)
        for name, x in half.items():
            x[1] = x[1] + self.config.dt * kicks[name]
        return {name: self._propagate(name, x) for name, x in half.items()}


def _identity_residual(states: Dict[str, np.ndarray], grid: ModeGrid) -> float:
    residual = 0.0
    if HAT_V in states and HAT_W in states:
        residual = max(residual, stacked_norm(states[FULL] - states[HAT_V] - states[HAT_W], grid))
    if V in states and W in states:
        residual = max(residual, stacked_norm(states[FULL] - states[V] - states[W], grid))
    return residual


def _evolve(
    config: EvolutionConfig,
    initial: Dict[str, PhaseState],
    linear_split: bool = False,
) -> TrajectoryRecord:
    grid = config.grid
    stepper = _SplitStepper(config, linear_split=linear_split)
    arrays = {name: state.as_array() for name, state in initial.items()}
    times: List[float] = []
    recorded: Dict[str, List[PhaseState]] = {name: [] for name in arrays}
    residuals: List[float] = []

    def record(step: int, residual: float) -> None:
        times.append(step * config.dt)
        residuals.append(residual)
        for name, x in arrays.items():
            recorded[name].append(PhaseState.from_stacked(grid, x))

    record(0, _identity_residual(arrays, grid))
    n_steps = config.n_steps
    for step in range(1, n_steps + 1):
        arrays = stepper.step(arrays)
        t = step * config.dt

        for name, x in arrays.items():
            size = stacked_norm(x, grid)
            if not np.isfinite(size) or size > DIVERGENCE_THRESHOLD:
                raise InstabilityError(f"component '{name}' reached H-norm {size:.3g} at t={t:.4g}")

        residual = _identity_residual(arrays, grid)
        if residual > IDENTITY_TOLERANCE:
            raise ConsistencyError(f"decomposition identity drifted to {residual:.3g} at t={t:.4g}")

        if step % config.stride == 0 or step == n_steps:
            record(step, residual)

    logger.debug(f"evolved {sorted(arrays)} for {n_steps} steps, max residual {max(residuals):.3g}")
    return TrajectoryRecord(
        grid=grid,
        epsilon=config.epsilon,
        times=np.array(times),
        states=recorded,
        identity_residuals=np.array(residuals),
    )


def _check_grid(config: EvolutionConfig, states: Iterable[PhaseState]) -> None:
    for state in states:
        if state.grid != config.grid:
            raise ConfigurationError("initial state lives on a different grid than the evolution")


def evolve_S(config: EvolutionConfig, x: PhaseState) -> TrajectoryRecord:
    """Full flow S(t)x."""
    _check_grid(config, [x])
    return _evolve(config, {FULL: x})


def evolve_hat_split(config: EvolutionConfig, x: PhaseState) -> TrajectoryRecord:
    """
    Co-evolve S(t)x with the split S(t)x = hat_v(t) + hat_w(t).

    Raises:
        PreconditionError: If ||x||_H exceeds the configured ball radius
    """
    _check_grid(config, [x])
    if x.norm() > config.ball_radius * (1.0 + 1e-12) + 1e-15:
        raise PreconditionError(f"||x||_H = {x.norm():.6g} exceeds ball radius {config.ball_radius}")
    return _evolve(config, {FULL: x, HAT_V: x, HAT_W: PhaseState.zeros(config.grid)})


def evolve_linear_split(config: EvolutionConfig, x: PhaseState) -> TrajectoryRecord:
    """
    Split S(t)x = L(t)x + zeta(t) with the purely linear part L(t)x.

    hat_v carries L(t)x and hat_w carries zeta, driven by f - phi(u).
    """
    _check_grid(config, [x])
    return _evolve(config, {FULL: x, HAT_V: x, HAT_W: PhaseState.zeros(config.grid)}, linear_split=True)


def evolve_VU(config: EvolutionConfig, x: PhaseState, y: PhaseState, z: PhaseState) -> TrajectoryRecord:
    """
    Co-evolve S(t)x, the hat split and the V/U split with y + z = x.

    Raises:
        PreconditionError: If y + z differs from x by more than 1e-12
        ConfigurationError: If sigma = 0 (psi undefined)
        ConsistencyError: If S(t)x - v - w drifts above 1e-6
    """
    _check_grid(config, [x, y, z])
    mismatch = float(np.max(np.abs((y + z - x).as_array())))
    if mismatch > SPLIT_TOLERANCE:
        raise PreconditionError(f"y + z differs from x by {mismatch:.3g}")
    if config.phi.sigma <= 0:
        raise ConfigurationError("the V/U split requires sigma > 0")
    return _evolve(config, {FULL: x, HAT_V: x, HAT_W: PhaseState.zeros(config.grid), V: y, W: z})


class SDWEFlow:
    """
    DecompositionFlow for the damped wave equation.

    ``advance`` evaluates (S(t)x, V_x(t)y, U_x(t)z) by co-evolving the V/U
    split for time t.
    """

    def __init__(self, config: EvolutionConfig):
        self.config = config

    def advance(self, x: PhaseState, y: PhaseState, z: PhaseState, t: float):
        steps = max(1, int(round(t / self.config.dt)))
        record = evolve_VU(self.config.with_horizon(t, stride=steps), x, y, z)
        return record.final(FULL), record.final(V), record.final(W)
