"""E2: uniform bounds and hat-split decay of the damped wave equation."""

import numpy as np

from attractor_lab.certificates.fitting import fit_growth_envelope
from attractor_lab.dynamics.linear import linear_decay_constants
from attractor_lab.dynamics.semigroup import FULL, HAT_V, HAT_W, evolve_hat_split
from attractor_lab.errors import InsufficientDataError
from attractor_lab.experiments.ensemble import run_ensemble
from attractor_lab.experiments.report import ExperimentReport
from attractor_lab.experiments.run_config import RunConfig
from attractor_lab.metrics.rates import fit_rate
from attractor_lab.metrics.sampling import sample_ball
from attractor_lab.utils.logging_config import get_logger

logger = get_logger(__name__)

IDENTITY_THRESHOLD = 1e-8
STABILITY_TOLERANCE = 1e-2
LINEAR_RATE_TOLERANCE = 0.02


def run_e2_sdwe_decay(config: RunConfig, workers: int = 1) -> ExperimentReport:
    """
    Evolve an ensemble from B_H(R0) through the hat split.

    Measures the uniform bound c0 (and its stability when the horizon is
    halved), the decay rate nu0 of hat_v, the growth envelope J0 of
    ||hat_w||_{H^{1/4}} and the split identity residual.

    Raises:
        InsufficientDataError: If the ensemble is empty
    """
    if config.ensemble_size < 1:
        raise InsufficientDataError("E2 needs a nonempty ensemble")
    evolution = config.evolution_config()
    grid = evolution.grid
    members = sample_ball(grid, config.r0, 0.0, config.ensemble_size, config.seed)
    logger.info(f"E2: evolving {len(members)} members to t={evolution.t_final}")
    records = run_ensemble(lambda x: evolve_hat_split(evolution, x), members, workers)

    report = ExperimentReport(
        experiment="E2",
        config_hash=config.config_hash(),
        seed=config.seed,
        config=config.model_dump(mode="json", exclude={"output_dir", "workers"}),
    )
    times = records[0].times
    full = np.array([record.norm_series(FULL, 0.0) for record in records])
    hat_v = np.array([record.norm_series(HAT_V, 0.0) for record in records])
    hat_w = np.array([record.norm_series(HAT_W, 0.25) for record in records])
    residual = max(float(np.max(record.identity_residuals)) for record in records)

    c0 = float(np.max(full))
    first_half = times <= 0.5 * times[-1]
    c0_half = float(np.max(full[:, first_half]))
    late = times >= 0.5 * times[-1]
    absorbing = float(np.max(full[:, late]))

    window = times >= config.fit_start_fraction * times[-1]
    worst_hat_v = np.max(hat_v, axis=0)
    fit = fit_rate(times[window], worst_hat_v[window])
    nu0 = fit.omega
    envelope = float(np.max(worst_hat_v * np.exp(nu0 * times)))
    growth = fit_growth_envelope(times, np.max(hat_w, axis=0))
    growth_excess = float(np.max(np.max(hat_w, axis=0) - growth(times)))

    report.fitted.update(
        {
            "c0": c0,
            "nu0": nu0,
            "hat_v_fit": fit.to_dict(),
            "J0": growth.to_dict(),
            "absorbing_radius_estimate": absorbing,
        }
    )
    report.add_check("uniform_bound_stability", abs(c0 - c0_half) / max(c0, 1e-300), "<=", STABILITY_TOLERANCE,
                     "relative change of sup ||S(t)x||_H between T/2 and T")
    report.add_check("hat_v_decay_rate", nu0, ">", 0.0, "fitted rate of max ||hat_v||_H")
    report.add_check("hat_w_envelope_excess", growth_excess, "<=", 1e-12, "max data - J0(t)")
    report.add_check("split_identity_residual", residual, "<=", IDENTITY_THRESHOLD, "max ||S(t)x - hat_v - hat_w||_H")

    phi = evolution.phi
    if phi.is_zero:
        linear = linear_decay_constants(grid)
        report.fitted["linear_decay"] = linear.to_dict()
        report.add_check("linear_rate_agreement", abs(nu0 - linear.delta) / linear.delta, "<=", LINEAR_RATE_TOLERANCE,
                         "relative gap between nu0 and delta")

    for t, value in zip(times, worst_hat_v):
        report.decay_table.append({"t": float(t), "dist": float(value), "bound": float(envelope * np.exp(-nu0 * t))})
    for member, record in enumerate(records):
        report.trajectories.extend(record.to_json_records(member))
    report.tables["trajectory_members"] = {"ensemble": [0, len(records)]}
    return report
