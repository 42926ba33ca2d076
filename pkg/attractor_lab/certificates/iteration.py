"""Iterated decomposition x_{n+1} = y_{n+1} + z_{n+1} with bound checks.

Starting from y_0 = x, z_0 = 0, each step advances by t_star:

    x_{n+1} = S(t_star) x_n
    y_{n+1} = V_{x_n}(t_star) y_n
    z_{n+1} = U_{x_n}(t_star) z_n

and records whether the claimed bounds ||y_n|| <= alpha_star^n R0 and
||z_n||_V <= R_star hold, along with the per-step hypotheses they rest on.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from attractor_lab.errors import ConsistencyError, PreconditionError
from attractor_lab.utils.logging_config import get_logger

logger = get_logger(__name__)

BOUND_TOLERANCE = 1e-9
SUM_TOLERANCE = 1e-6

Norm = Callable[[Any], float]


class DecompositionFlow(Protocol):
    """Anything that can advance (x, y, z) by a time t."""

    def advance(self, x: Any, y: Any, z: Any, t: float) -> Tuple[Any, Any, Any]: ...


@dataclass(frozen=True)
class OperatorTriple:
    """
    Flow given by three callables.

    Attributes:
        S: (x, t) -> S(t) x
        V: (x, y, t) -> V_x(t) y
        U: (x, z, t) -> U_x(t) z
    """

    S: Callable[[Any, float], Any]
    V: Callable[[Any, Any, float], Any]
    U: Callable[[Any, Any, float], Any]

    def advance(self, x, y, z, t):
        return self.S(x, t), self.V(x, y, t), self.U(x, z, t)


def _euclidean(x) -> float:
    return float(np.linalg.norm(x))


@dataclass(frozen=True)
class IterationStep:
    n: int
    y_norm: float
    z_norm: float
    y_bound: float
    z_bound: float
    sum_residual: float
    y_hypothesis_ok: Optional[bool] = None
    z_hypothesis_ok: Optional[bool] = None

    @property
    def claims_ok(self) -> bool:
        return self.y_norm <= self.y_bound + BOUND_TOLERANCE and self.z_norm <= self.z_bound + BOUND_TOLERANCE

    @property
    def hypotheses_ok(self) -> bool:
        return self.y_hypothesis_ok is not False and self.z_hypothesis_ok is not False

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "y_norm": self.y_norm,
            "z_norm": self.z_norm,
            "y_bound": self.y_bound,
            "z_bound": self.z_bound,
            "sum_residual": self.sum_residual,
            "claims_ok": self.claims_ok,
            "hypotheses_ok": self.hypotheses_ok,
        }


@dataclass
class IterationReport:
    alpha_star: float
    beta_star: float
    J_star: float
    R0: float
    R_star: float
    steps: List[IterationStep] = field(default_factory=list)
    xs: List[Any] = field(default_factory=list)
    first_claim_violation: Optional[int] = None
    first_hypothesis_violation: Optional[int] = None

    @property
    def first_violation(self) -> Optional[int]:
        found = [n for n in (self.first_claim_violation, self.first_hypothesis_violation) if n is not None]
        return min(found) if found else None

    @property
    def passed(self) -> bool:
        return self.first_violation is None

    def to_dict(self) -> dict:
        return {
            "alpha_star": self.alpha_star,
            "beta_star": self.beta_star,
            "J_star": self.J_star,
            "R0": self.R0,
            "R_star": self.R_star,
            "first_claim_violation": self.first_claim_violation,
            "first_hypothesis_violation": self.first_hypothesis_violation,
            "steps": [step.to_dict() for step in self.steps],
        }


def iterate_decomposition(
    flow: DecompositionFlow,
    x: Any,
    t_star: float,
    n_max: int,
    *,
    alpha_star: float,
    beta_star: float,
    J_star: float,
    R0: float,
    norm_h: Norm = _euclidean,
    norm_v: Optional[Norm] = None,
) -> IterationReport:
    """
    Run the decomposition iteration for n_max steps.

    Args:
        flow: Flow providing S, V and U at time t_star
        x: Initial point, ||x||_H <= R0
        t_star: Step length
        n_max: Number of steps
        alpha_star, beta_star, J_star: Certificate values at t_star
        R0: Radius of the initial ball
        norm_h: Norm of the phase space
        norm_v: Norm of the more regular space (defaults to norm_h)

    Returns:
        IterationReport; violations are recorded, not raised

    Raises:
        PreconditionError: If beta_star >= 1
        ConsistencyError: If x_n - y_n - z_n exceeds 1e-6 (relative)
    """
    if beta_star >= 1:
        raise PreconditionError(f"beta_star must be < 1, got {beta_star}")
    norm_v = norm_v or norm_h
    r_star = 2.0 * J_star / (1.0 - beta_star)
    report = IterationReport(alpha_star=alpha_star, beta_star=beta_star, J_star=J_star, R0=R0, R_star=r_star)

    x_n, y_n, z_n = x, x, x - x
    for n in range(n_max + 1):
        if n > 0:
            prev_y, prev_z = norm_h(y_n), norm_v(z_n)
            x_n, y_n, z_n = flow.advance(x_n, y_n, z_n, t_star)
        residual = norm_h(x_n - (y_n + z_n)) / max(1.0, norm_h(x_n))
        if residual > SUM_TOLERANCE:
            raise ConsistencyError(f"x_n - y_n - z_n = {residual:.3g} at n={n}")

        y_norm, z_norm = norm_h(y_n), norm_v(z_n)
        step = IterationStep(
            n=n,
            y_norm=y_norm,
            z_norm=z_norm,
            y_bound=alpha_star**n * R0,
            z_bound=r_star,
            sum_residual=residual,
            y_hypothesis_ok=None if n == 0 else y_norm <= alpha_star * prev_y + BOUND_TOLERANCE,
            z_hypothesis_ok=None if n == 0 else z_norm <= beta_star * prev_z + J_star + BOUND_TOLERANCE,
        )
        report.steps.append(step)
        report.xs.append(x_n)
        if not step.claims_ok and report.first_claim_violation is None:
            report.first_claim_violation = n
        if not step.hypotheses_ok and report.first_hypothesis_violation is None:
            report.first_hypothesis_violation = n

    if report.first_violation is not None:
        logger.info(
            f"iteration flagged: claims at {report.first_claim_violation}, "
            f"hypotheses at {report.first_hypothesis_violation}"
        )
    return report


@dataclass
class DiscreteAttractionReport:
    """Result of main2_discrete_check."""

    R_star: float
    checks: int = 0
    violations: List[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"R_star": self.R_star, "checks": self.checks, "violations": list(self.violations)}


def main2_discrete_check(
    flow: DecompositionFlow,
    samples: Sequence[Any],
    t_star: float,
    n_max: int,
    *,
    alpha_star: float,
    beta_star: float,
    J_star: float,
    R0: float,
    norm_h: Norm = _euclidean,
    norm_v: Optional[Norm] = None,
    ball_distance: Optional[Callable[[Any, float], float]] = None,
) -> DiscreteAttractionReport:
    """
    Check dist(S(n t_star) x, B_V(R_star)) <= alpha_star^n R0 along each sample.

    ``ball_distance(x, radius)`` measures the H-distance to B_V(radius); the
    default max(||x||_H - radius, 0) assumes V and H share a norm.

    Raises:
        PreconditionError: If alpha_star or beta_star is outside [0, 1), or a sample lies outside B(R0)
    """
    if not 0 <= alpha_star < 1:
        raise PreconditionError(f"alpha_star must lie in [0, 1), got {alpha_star}")
    if not 0 <= beta_star < 1:
        raise PreconditionError(f"beta_star must lie in [0, 1), got {beta_star}")
    if ball_distance is None:
        def ball_distance(point, radius):
            return max(norm_h(point) - radius, 0.0)

    r_star = 2.0 * J_star / (1.0 - beta_star)
    report = DiscreteAttractionReport(R_star=r_star)
    for index, x in enumerate(samples):
        if norm_h(x) > R0 * (1.0 + 1e-12):
            raise PreconditionError(f"sample {index} lies outside B(R0)")
        run = iterate_decomposition(
            flow, x, t_star, n_max,
            alpha_star=alpha_star, beta_star=beta_star, J_star=J_star, R0=R0,
            norm_h=norm_h, norm_v=norm_v,
        )
        for n, x_n in enumerate(run.xs):
            distance = ball_distance(x_n, r_star)
            bound = alpha_star**n * R0
            report.checks += 1
            if distance > bound + BOUND_TOLERANCE:
                report.violations.append({"sample": index, "n": n, "distance": distance, "bound": bound})
    return report
