"""E1: certificate machinery on synthetic operator families."""

from typing import List, Optional, Tuple

import numpy as np

from attractor_lab.certificates.constants import (
    AttractionCertificate,
    TStarChoice,
    certificate_entry,
    entering_time,
    main_constants,
    select_t_star,
)
from attractor_lab.certificates.iteration import iterate_decomposition, main2_discrete_check
from attractor_lab.dynamics.semigroup import FULL
from attractor_lab.experiments.report import ExperimentReport
from attractor_lab.experiments.run_config import RunConfig
from attractor_lab.experiments.synthetic import AFFINE, BOUNDED, SyntheticFamily
from attractor_lab.utils.logging_config import get_logger

logger = get_logger(__name__)

SLACK = 1e-9
ABSORBING_RADII = (2.0, 10.0, 50.0)


def _ball_points(rng: np.random.Generator, dimension: int, radius: float, count: int) -> List[np.ndarray]:
    points = []
    for _ in range(count):
        direction = rng.standard_normal(dimension)
        points.append(direction / np.linalg.norm(direction) * radius * rng.uniform())
    return points


def _sphere_points(rng: np.random.Generator, dimension: int, radius: float, count: int) -> List[np.ndarray]:
    points = []
    for _ in range(count):
        direction = rng.standard_normal(dimension)
        points.append(direction / np.linalg.norm(direction) * radius)
    return points


def _family_certificate(config: RunConfig, family: SyntheticFamily) -> Tuple[AttractionCertificate, Optional[TStarChoice]]:
    choice = select_t_star(family.beta(), config.t_star_margin) if config.t_star == "auto" else None
    t_star = choice.t_star if choice is not None else float(config.t_star)
    cert = main_constants(family.alpha(), family.beta(), family.declared_growth(), config.r0, t_star)
    return cert, choice


def _check_family(config: RunConfig, family: SyntheticFamily, rng: np.random.Generator) -> dict:
    """Count violations of every certified statement for one honest family."""
    synthetic = config.synthetic
    m = family.dimension
    cert, choice = _family_certificate(config, family)
    t_star = cert.t_star
    tec = cert.tec
    counts = {"tec": 0, "halving": 0, "absorbing": 0, "iteration": 0, "decay": 0, "discrete": 0}
    samples = _ball_points(rng, m, config.r0, synthetic.samples)

    # One-step bound at t_star, on points inside and far outside R_star.
    for x in samples:
        for z in _ball_points(rng, m, 10.0 * tec.R_star + config.r0, synthetic.samples):
            _, _, u = family.advance(x, z, z, t_star)
            if np.linalg.norm(u) > tec.step_bound(np.linalg.norm(z)) + SLACK:
                counts["tec"] += 1

    if tec.R_star > 0:
        for factor in ABSORBING_RADII:
            radius = factor * tec.R_star
            _, t_enter = entering_time(radius, tec)
            for z in _sphere_points(rng, m, radius, synthetic.samples):
                if np.linalg.norm(family.S(z, t_star)) > tec.halving_factor * radius + SLACK:
                    counts["halving"] += 1
                for t in t_enter + np.linspace(0.0, 3.0 * t_star, 7):
                    if np.linalg.norm(family.S(z, t)) > tec.absorbing_radius + SLACK:
                        counts["absorbing"] += 1

    for x in samples:
        run = iterate_decomposition(
            family, x, t_star, synthetic.n_max,
            alpha_star=cert.alpha_star, beta_star=tec.beta_star, J_star=tec.J_star, R0=config.r0,
        )
        if not run.passed:
            counts["iteration"] += 1
        for t in np.linspace(0.0, 6.0 * t_star, 25):
            distance = max(np.linalg.norm(family.S(x, t)) - cert.rho, 0.0)
            if distance > float(cert.bound(t)) + SLACK:
                counts["decay"] += 1

    discrete = main2_discrete_check(
        family, samples, t_star, synthetic.n_max,
        alpha_star=cert.alpha_star, beta_star=tec.beta_star, J_star=tec.J_star, R0=config.r0,
    )
    counts["discrete"] = len(discrete.violations)
    return {"family": family.to_dict(), "certificate": certificate_entry(cert, choice), "violations": counts}


def run_e1_abstract(config: RunConfig, workers: int = 1) -> ExperimentReport:
    """
    Run the certificate checks on randomized synthetic families.

    Honest families (affine with rotation and bounded-nonlinear, alternating)
    must produce zero violations; adversarial families must be flagged by
    the iteration; a family with J = 0 must be attracted to the zero ball.
    """
    synthetic = config.synthetic
    rng = np.random.default_rng(config.seed)
    report = ExperimentReport(
        experiment="E1",
        config_hash=config.config_hash(),
        seed=config.seed,
        config=config.model_dump(mode="json", exclude={"output_dir", "workers"}),
    )

    rows = []
    for index in range(synthetic.families):
        kind = AFFINE if index % 2 == 0 else BOUNDED
        family = SyntheticFamily.random(rng, synthetic.dimension, kind=kind)
        rows.append(_check_family(config, family, rng))
    totals = {key: sum(row["violations"][key] for row in rows) for key in rows[0]["violations"]}
    logger.info(f"E1: {synthetic.families} families, violations {totals}")

    flagged = 0
    adversarial_rows = []
    for _ in range(synthetic.adversarial):
        family = SyntheticFamily.adversarial(rng, synthetic.dimension, synthetic.violation)
        cert, _ = _family_certificate(config, family)
        t_star = cert.t_star
        x = _ball_points(rng, synthetic.dimension, config.r0, 1)[0]
        run = iterate_decomposition(
            family, x, t_star, synthetic.n_max,
            alpha_star=cert.alpha_star, beta_star=cert.tec.beta_star, J_star=cert.tec.J_star, R0=config.r0,
        )
        flagged += run.first_violation is not None
        adversarial_rows.append({"family": family.to_dict(), "first_violation": run.first_violation})

    representative = rows[0]
    report.certificates["representative"] = representative["certificate"]
    report.tables["families"] = rows
    report.tables["adversarial"] = adversarial_rows
    report.fitted["violations"] = totals

    for key, value in totals.items():
        report.add_check(f"{key}_violations", value, "<=", 0, "count over all honest families")
    report.add_check("adversarial_flagged", flagged, ">=", synthetic.adversarial, "families flagged by the iteration")

    if synthetic.include_zero_forcing:
        family = SyntheticFamily.random(rng, synthetic.dimension, kind=AFFINE, zero_forcing=True)
        cert, choice = _family_certificate(config, family)
        t_star = cert.t_star
        worst = 0.0
        for x in _ball_points(rng, synthetic.dimension, config.r0, synthetic.samples):
            for t in np.linspace(0.0, 6.0 * t_star, 25):
                worst = max(worst, np.linalg.norm(family.S(x, t)) - float(cert.bound(t)))
        report.certificates["zero_forcing"] = certificate_entry(cert, choice)
        report.add_check("zero_ball_radius", cert.rho, "<=", 0.0, "rho for J = 0")
        report.add_check("zero_ball_decay_excess", worst, "<=", SLACK, "max ||S(t)x|| - K e^{-omega t}")

    # Decay table of the representative family: worst distance over its samples.
    family_rng = np.random.default_rng(config.seed)
    family = SyntheticFamily.random(family_rng, synthetic.dimension, kind=AFFINE)
    cert, choice = _family_certificate(config, family)
    points = _ball_points(family_rng, synthetic.dimension, config.r0, synthetic.samples)
    report.certificates["decay"] = certificate_entry(cert, choice)
    for t in np.linspace(0.0, 6.0 * cert.t_star, 25):
        images = [family.S(x, t) for x in points]
        distance = max(max(np.linalg.norm(y) - cert.rho, 0.0) for y in images)
        report.decay_table.append({"t": float(t), "dist": float(distance), "bound": float(cert.bound(t))})
        for member, y in enumerate(images):
            report.trajectories.append(point_record(float(t), member, y))
    return report


def point_record(t: float, member: int, y: np.ndarray) -> dict:
    """trajectories.jsonl record of a synthetic-family point S(t)x."""
    return {
        "t": t,
        "member": member,
        "component": FULL,
        "norms": {"H": float(np.linalg.norm(y))},
        "residual": 0.0,
        "state": {"coords": [float(c) for c in y]},
    }
