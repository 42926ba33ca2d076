"""Dispatch a RunConfig to its experiment."""

from typing import Callable, Dict

from attractor_lab.experiments.abstract import run_e1_abstract
from attractor_lab.experiments.fff import run_e4_fff
from attractor_lab.experiments.regularity import run_e3_regularity
from attractor_lab.experiments.report import ExperimentReport
from attractor_lab.experiments.run_config import RunConfig
from attractor_lab.experiments.sdwe_decay import run_e2_sdwe_decay
from attractor_lab.utils.logging_config import get_logger

logger = get_logger(__name__)

EXPERIMENTS: Dict[str, Callable[[RunConfig, int], ExperimentReport]] = {
    "E1": run_e1_abstract,
    "E2": run_e2_sdwe_decay,
    "E3": run_e3_regularity,
    "E4": run_e4_fff,
}

DESCRIPTIONS = {
    "E1": "certificate checks on synthetic operator families",
    "E2": "damped wave ensemble: uniform bound, hat-split decay",
    "E3": "H^{1/4} attraction certificate and H^1 bootstrap",
    "E4": "attraction of larger balls toward the H^1 ball",
}


def run_experiment(config: RunConfig, workers: int = 1) -> ExperimentReport:
    """
    Run the experiment named in ``config``.

    Args:
        config: Validated run configuration
        workers: Threads for ensemble members

    Returns:
        ExperimentReport (not yet written)
    """
    logger.info(f"Running {config.experiment} ({DESCRIPTIONS[config.experiment]}), seed {config.seed}")
    report = EXPERIMENTS[config.experiment](config, workers)
    logger.info(f"{config.experiment}: {len(report.checks) - len(report.failed_checks)}/{len(report.checks)} checks passed")
    return report
