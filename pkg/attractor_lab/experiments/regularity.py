"""E3: exponential attraction toward an H^{1/4} ball, then a bootstrap to H^1.

Stage 1 fits (alpha, beta, J) from the V/U split, builds the attraction
certificate for V = H^{1/4} and checks the measured distance decay against
K e^{-omega t}. Stage 2 restarts from late stage-1 states, uses the linear
semigroup's (M, delta) as alpha = beta and the growth of zeta in H^1 as J.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from attractor_lab.certificates.constants import (
    AttractionCertificate,
    TStarChoice,
    certificate_entry,
    main_constants,
    select_t_star,
)
from attractor_lab.certificates.fitting import fit_decay_envelope, fit_differential_inequality, fit_growth_envelope
from attractor_lab.certificates.functions import DecayFn
from attractor_lab.certificates.iteration import iterate_decomposition
from attractor_lab.dynamics.linear import linear_decay_constants
from attractor_lab.dynamics.semigroup import (
    FULL,
    HAT_W,
    V,
    W,
    EvolutionConfig,
    SDWEFlow,
    TrajectoryRecord,
    evolve_linear_split,
    evolve_VU,
)
from attractor_lab.errors import InsufficientDataError
from attractor_lab.experiments.ensemble import run_ensemble
from attractor_lab.experiments.report import ExperimentReport
from attractor_lab.experiments.run_config import RunConfig
from attractor_lab.metrics.distances import NormSpec, dist_to_ball
from attractor_lab.metrics.rates import fit_rate
from attractor_lab.metrics.sampling import sample_ball
from attractor_lab.spectral.core import PhaseState
from attractor_lab.utils.logging_config import get_logger

logger = get_logger(__name__)

QUARTER = 0.25
SLACK = 1e-9
IDENTITY_THRESHOLD = 1e-8
GRONWALL_TOLERANCE = 1e-2
MIN_NORM = 1e-12


@dataclass
class StageResult:
    """Certificate and measurements of one stage."""

    certificate: AttractionCertificate
    norm_spec: NormSpec
    times: np.ndarray
    distances: np.ndarray  # members x times
    enclosure_radius: float
    records: List[TrajectoryRecord]
    t_star_choice: Optional[TStarChoice] = None
    directed: List[TrajectoryRecord] = field(default_factory=list)

    @property
    def worst_distance(self) -> np.ndarray:
        return np.max(self.distances, axis=0)

    @property
    def decay_excess(self) -> float:
        return float(np.max(self.distances - self.certificate.bound(self.times)[None, :]))


def _t_star(config: RunConfig, *decays: DecayFn) -> Optional[TStarChoice]:
    """Automatic choice for the slowest of ``decays``; None when t_star is configured."""
    if config.t_star != "auto":
        return None
    return max((select_t_star(decay, config.t_star_margin) for decay in decays), key=lambda choice: choice.t_star)


def distances_to_ball(records: List[TrajectoryRecord], rho: float, spec: NormSpec) -> np.ndarray:
    return np.array([[dist_to_ball(state, rho, spec) for state in record.states[FULL]] for record in records])


def late_enclosure(records: List[TrajectoryRecord], r: float) -> float:
    times = records[0].times
    late = times >= 0.75 * times[-1]
    return float(max(np.max(record.norm_series(FULL, r)[late]) for record in records))


def _ratio(numerator: np.ndarray, denominator: float) -> np.ndarray:
    return numerator / denominator if denominator > MIN_NORM else np.zeros_like(numerator)


def v_ratio_rows(records: List[TrajectoryRecord]) -> List[np.ndarray]:
    """||v(t)||_H / ||y||_H along each V/U record (v starts at y)."""
    return [_ratio(record.norm_series(V, 0.0), record.states[V][0].norm(0.0)) for record in records]


def run_stage_one(config: RunConfig, evolution: EvolutionConfig, members, workers: int, report: ExperimentReport) -> StageResult:
    grid = evolution.grid
    zero = PhaseState.zeros(grid)
    sampled = sample_ball(grid, 1.0, QUARTER, len(members) * config.directions_per_member, config.seed + 1)
    pairs = []
    for index, direction in enumerate(sampled):
        size = direction.norm(QUARTER)
        if size > MIN_NORM:
            pairs.append((members[index % len(members)], direction * (1.0 / size)))

    base = run_ensemble(lambda x: evolve_VU(evolution, x, x, zero), members, workers)
    directed = run_ensemble(lambda pair: evolve_VU(evolution, pair[0], pair[1], pair[0] - pair[1]), pairs, workers)
    times = base[0].times
    if not directed:
        raise InsufficientDataError("no usable directions for the beta fit")

    alpha_data = np.max(v_ratio_rows(base + directed), axis=0)
    beta_data = np.max([record.norm_series(V, QUARTER) for record in directed], axis=0)
    j_data = np.max([record.norm_series(W, QUARTER) for record in base], axis=0)
    alpha = fit_decay_envelope(times, alpha_data, config.fit_start_fraction)
    beta = fit_decay_envelope(times, beta_data, config.fit_start_fraction)
    growth = fit_growth_envelope(times, j_data)
    choice = _t_star(config, alpha, beta)
    t_star = choice.t_star if choice is not None else float(config.t_star)
    cert = main_constants(alpha, beta, growth, config.r0, t_star)
    logger.info(f"E3 stage 1: t_star={t_star:.4g}, rho={cert.rho:.4g}, K={cert.K:.4g}, omega={cert.omega:.4g}")

    spec = NormSpec(grid, 0.0, QUARTER)
    distances = distances_to_ball(base, cert.rho, spec)
    enclosure = late_enclosure(base, QUARTER)
    residual = max(float(np.max(record.identity_residuals)) for record in base + directed)

    v_window = times >= config.fit_start_fraction * times[-1]
    v_rate = fit_rate(times[v_window], alpha_data[v_window])
    energy_v = fit_differential_inequality(times, np.max([r.energy_series(V, 0.0) for r in base], axis=0), evolution.epsilon)
    energy_w = fit_differential_inequality(times, np.max([r.energy_series(W, QUARTER) for r in base], axis=0), evolution.epsilon)

    report.fitted["stage1"] = {
        "alpha": alpha.to_dict(),
        "beta": beta.to_dict(),
        "J": growth.to_dict(),
        "v_rate": v_rate.to_dict(),
        "Lambda0": energy_v.to_dict(),
        "Lambda1": energy_w.to_dict(),
        "enclosure_radius": enclosure,
    }
    report.certificates["stage1"] = certificate_entry(cert, choice)

    stage = StageResult(cert, spec, times, distances, enclosure, base, choice, directed)
    report.add_check("stage1_decay_excess", stage.decay_excess, "<=", SLACK, "max dist(S(t)x, B(rho)) - K e^{-omega t}")
    report.add_check("stage1_enclosure", enclosure, "<=", cert.rho, "late H^{1/4} radius vs rho")
    report.add_check("stage1_identity_residual", residual, "<=", IDENTITY_THRESHOLD, "max ||S(t)x - v - w||_H")
    report.add_check("stage1_v_decay_rate", v_rate.omega, ">", 0.0, "fitted rate of ||v||_H / ||y||_H")
    if energy_w.bounded:
        report.add_check("stage1_lambda1_gronwall", energy_w.max_violation, "<=", GRONWALL_TOLERANCE,
                         "relative excess of Lambda1 over the fitted Gronwall bound")

    iteration_rows = []
    flow = SDWEFlow(evolution)
    for x in members[: config.iteration_members]:
        run = iterate_decomposition(
            flow, x, cert.t_star, config.iteration_steps,
            alpha_star=cert.alpha_star, beta_star=cert.tec.beta_star, J_star=cert.tec.J_star, R0=config.r0,
            norm_h=lambda s: s.norm(0.0), norm_v=lambda s: s.norm(QUARTER),
        )
        iteration_rows.append(run.to_dict())
        broken = sum(not step.claims_ok for step in run.steps)
        report.add_check(f"stage1_iteration_claims_{len(iteration_rows) - 1}", broken, "<=", 0,
                         "steps violating ||y_n|| <= alpha_star^n R0 or ||z_n||_{H^{1/4}} <= R_star")
    report.tables["stage1_iterations"] = iteration_rows
    return stage


def run_stage_two(config: RunConfig, evolution: EvolutionConfig, stage_one: StageResult, workers: int,
                  report: ExperimentReport) -> StageResult:
    grid = evolution.grid
    starts = [record.final(FULL) for record in stage_one.records]
    radius = max([config.r0] + [x.norm(0.0) for x in starts])
    stage_evolution = config.evolution_config(radius=radius)

    linear = linear_decay_constants(grid)
    decay = DecayFn.exp_floor(linear.M, linear.delta, 0.0)
    records = run_ensemble(lambda x: evolve_linear_split(stage_evolution, x), starts, workers)
    times = records[0].times
    growth = fit_growth_envelope(times, np.max([record.norm_series(HAT_W, 1.0) for record in records], axis=0))
    choice = select_t_star(decay, config.t_star_margin)
    cert = main_constants(decay, decay, growth, radius, choice.t_star)
    logger.info(f"E3 stage 2: rho={cert.rho:.4g}, K={cert.K:.4g}, omega={cert.omega:.4g}")

    spec = NormSpec(grid, 0.0, 1.0)
    distances = distances_to_ball(records, cert.rho, spec)
    enclosure = late_enclosure(records, 1.0)
    residual = max(float(np.max(record.identity_residuals)) for record in records)

    report.fitted["stage2"] = {
        "linear_decay": linear.to_dict(),
        "J": growth.to_dict(),
        "R0": radius,
        "enclosure_radius": enclosure,
    }
    report.certificates["stage2"] = certificate_entry(cert, choice)
    stage = StageResult(cert, spec, times, distances, enclosure, records, choice)
    report.add_check("stage2_decay_excess", stage.decay_excess, "<=", SLACK, "max dist(S(t)x, B_{H^1}(rho)) - K e^{-omega t}")
    report.add_check("stage2_enclosure", enclosure, "<=", cert.rho, "late H^1 radius vs rho")
    report.add_check("stage2_identity_residual", residual, "<=", IDENTITY_THRESHOLD, "max ||S(t)x - L(t)x - zeta||_H")
    return stage


def prepare(config: RunConfig):
    if config.ensemble_size < 1:
        raise InsufficientDataError("E3 needs a nonempty ensemble")
    evolution = config.evolution_config()
    members = sample_ball(evolution.grid, config.r0, 0.0, config.ensemble_size, config.seed)
    return evolution, members


def run_e3_regularity(config: RunConfig, workers: int = 1) -> ExperimentReport:
    """Run both stages and collect the decay tables and trajectories."""
    evolution, members = prepare(config)
    report = ExperimentReport(
        experiment="E3",
        config_hash=config.config_hash(),
        seed=config.seed,
        config=config.model_dump(mode="json", exclude={"output_dir", "workers"}),
    )
    stage_one = run_stage_one(config, evolution, members, workers, report)
    stage_two = run_stage_two(config, evolution, stage_one, workers, report)

    bound = stage_one.certificate.bound(stage_one.times)
    for t, value, limit in zip(stage_one.times, stage_one.worst_distance, bound):
        report.decay_table.append({"t": float(t), "dist": float(value), "bound": float(limit)})
    bound_two = stage_two.certificate.bound(stage_two.times)
    report.tables["stage2_decay"] = [
        {"t": float(t), "dist": float(value), "bound": float(limit)}
        for t, value, limit in zip(stage_two.times, stage_two.worst_distance, bound_two)
    ]
    groups = {"stage1_base": stage_one.records, "stage1_directions": stage_one.directed, "stage2": stage_two.records}
    report.tables["trajectory_members"] = {}
    member = 0
    for name, records in groups.items():
        report.tables["trajectory_members"][name] = [member, member + len(records)]
        for record in records:
            report.trajectories.extend(record.to_json_records(member))
            member += 1
    return report
