"""E4: attraction of larger balls B_H(R) toward the H^1 ball of E3."""

from typing import List

import numpy as np

from attractor_lab.certificates.constants import certificate_entry
from attractor_lab.dynamics.semigroup import FULL, TrajectoryRecord, dt_max, equilibrium_norm, evolve_S
from attractor_lab.errors import InsufficientDataError
from attractor_lab.experiments.ensemble import run_ensemble
from attractor_lab.experiments.regularity import prepare, run_stage_one, run_stage_two
from attractor_lab.experiments.report import ExperimentReport
from attractor_lab.experiments.run_config import RunConfig
from attractor_lab.metrics.distances import NormSpec, dist_to_ball
from attractor_lab.metrics.rates import RateFit, fit_rate
from attractor_lab.metrics.sampling import sample_ball
from attractor_lab.utils.logging_config import get_logger

logger = get_logger(__name__)

RATE_TOLERANCE = 0.30
DISTANCE_FLOOR = 1e-14


def worst_distance(records: List[TrajectoryRecord], rho: float, spec: NormSpec) -> np.ndarray:
    """max over members of dist(S(t)x, B(rho)) at each recorded time."""
    return np.max([[dist_to_ball(state, rho, spec) for state in record.states[FULL]] for record in records], axis=0)


def fit_distance_rate(times: np.ndarray, worst: np.ndarray) -> RateFit:
    """Rate fit on the distances above round-off."""
    positive = worst > DISTANCE_FLOOR
    return fit_rate(times[positive], worst[positive])


def _evolution_for_radius(config: RunConfig, radius: float):
    """Evolution config for B_H(radius), with dt reduced when the ball needs it."""
    base = config.evolution_config()
    limit = dt_max(base.grid, base.phi, radius + equilibrium_norm(base.forcing))
    if config.dt <= limit:
        return config.evolution_config(radius=radius)
    steps = int(np.ceil(config.dt / (0.9 * limit)))
    logger.info(f"E4: radius {radius:.3g} needs dt <= {limit:.3g}; refining by {steps}")
    return config.evolution_config(radius=radius, dt=config.dt / steps).with_horizon(
        config.t_final, stride=config.stride * steps
    )


def run_e4_fff(config: RunConfig, workers: int = 1) -> ExperimentReport:
    """
    Measure dist_H(S(t) B_H(R), B_{H^1}(rho)) for R = factor * R0.

    rho is the stage-2 radius of E3 (or ``target_radius``). For each radius
    the worst distance over the ensemble is fitted by C e^{-omega t} on the
    points above round-off; rates are compared to the base radius and the
    prefactors must not decrease with R.
    """
    evolution, members = prepare(config)
    report = ExperimentReport(
        experiment="E4",
        config_hash=config.config_hash(),
        seed=config.seed,
        config=config.model_dump(mode="json", exclude={"output_dir", "workers"}),
    )
    scratch = ExperimentReport(experiment="E3", config_hash=report.config_hash, seed=config.seed)
    stage_one = run_stage_one(config, evolution, members, workers, scratch)
    stage_two = run_stage_two(config, evolution, stage_one, workers, scratch)
    rho = config.target_radius or stage_two.certificate.rho
    report.certificates["stage2"] = certificate_entry(stage_two.certificate, stage_two.t_star_choice)
    report.fitted["rho"] = rho
    spec = NormSpec(evolution.grid, 0.0, 1.0)

    rows = []
    member = 0
    for index, factor in enumerate(config.radius_factors):
        radius = factor * config.r0
        radius_evolution = _evolution_for_radius(config, radius)
        ensemble = sample_ball(evolution.grid, radius, 0.0, config.ensemble_size, config.seed + 100 + index)
        records = run_ensemble(lambda x: evolve_S(radius_evolution, x), ensemble, workers)
        times = records[0].times
        worst = worst_distance(records, rho, spec)
        row = {
            "factor": factor,
            "radius": radius,
            "points": int(np.count_nonzero(worst > DISTANCE_FLOOR)),
            "members": [member, member + len(records)],
        }
        try:
            fit = fit_distance_rate(times, worst)
            row.update({"omega": fit.omega, "prefactor": fit.envelope_constant, "fit": fit.to_dict()})
        except InsufficientDataError:
            row.update({"omega": None, "prefactor": None})
        rows.append(row)
        logger.info(f"E4: R={radius:.3g}, fit {row.get('omega')}")
        for record in records:
            report.trajectories.extend(record.to_json_records(member))
            member += 1
        if index == len(config.radius_factors) - 1:
            for t, value in zip(times, worst):
                bound = row["prefactor"] * np.exp(-row["omega"] * t) if row["omega"] is not None else float("nan")
                report.decay_table.append({"t": float(t), "dist": float(value), "bound": float(bound)})

    report.tables["radii"] = rows
    fitted = [row for row in rows if row["omega"] is not None]
    report.add_check("fitted_radii", len(fitted), ">=", len(rows), "radii with at least three positive distances")
    if fitted:
        reference = fitted[0]["omega"]
        for row in fitted[1:]:
            gap = abs(row["omega"] - reference) / abs(reference) if reference else float("inf")
            report.add_check(f"rate_agreement_R{row['factor']:g}", gap, "<=", RATE_TOLERANCE,
                             "relative gap to the smallest radius' rate")
        prefactors = [row["prefactor"] for row in fitted]
        drops = sum(b < a for a, b in zip(prefactors, prefactors[1:]))
        report.add_check("prefactor_monotone", drops, "<=", 0, "decreases of the prefactor along increasing R")
    return report
