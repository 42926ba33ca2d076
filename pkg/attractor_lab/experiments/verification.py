"""Re-evaluate a written run from its files.

Besides the bookkeeping (comparators, hashes, decay rows, residuals) the
recorded states in trajectories.jsonl are turned back into trajectories and
the fits and distances each experiment reports are computed again.
"""

import math
from collections import defaultdict
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from attractor_lab.dynamics.semigroup import FULL, HAT_V, HAT_W, V, W, TrajectoryRecord
from attractor_lab.errors import AttractorLabError, ConfigurationError
from attractor_lab.experiments.fff import fit_distance_rate, worst_distance
from attractor_lab.experiments.regularity import QUARTER, distances_to_ball, late_enclosure, v_ratio_rows
from attractor_lab.experiments.report import COMPARATORS, content_hash, strip_volatile
from attractor_lab.experiments.run_config import RunConfig
from attractor_lab.metrics.distances import NormSpec, semidist
from attractor_lab.metrics.rates import fit_rate
from attractor_lab.output.writers import (
    DECAY_FILE,
    TRAJECTORY_FILE,
    read_decay_table,
    read_report,
    read_trajectories,
)
from attractor_lab.spectral.core import ModeGrid, PhaseState, stacked_norm
from attractor_lab.utils.logging_config import get_logger

logger = get_logger(__name__)

RESIDUAL_TOLERANCE = 1e-8
DECAY_RTOL = 1e-9
DECAY_ATOL = 1e-12
RECOMPUTE_RTOL = 1e-9
RECOMPUTE_ATOL = 1e-12
RECOMPUTED = "from trajectories: "


def _as_float(value) -> float:
    """Report values may be the strings "nan", "inf" or "-inf"."""
    return float(value)


class Recomputation:
    """Problems found while recomputing a run's numbers from its trajectories."""

    def __init__(self, data: dict, decay_rows: List[Dict[str, float]]):
        self.data = data
        self.decay_rows = decay_rows
        self.problems: List[str] = []

    def flag(self, message: str) -> None:
        self.problems.append(RECOMPUTED + message)

    def compare(self, label: str, recorded, recomputed: float) -> None:
        if recorded is None:
            self.flag(f"{label}: missing from the report")
            return
        recorded = _as_float(recorded)
        if math.isnan(recorded) and math.isnan(recomputed):
            return
        if not math.isclose(recorded, recomputed, rel_tol=RECOMPUTE_RTOL, abs_tol=RECOMPUTE_ATOL):
            self.flag(f"{label}: recorded {recorded:.12g}, recomputed {recomputed:.12g}")

    def compare_check(self, name: str, recomputed: float) -> None:
        check = next((c for c in self.data.get("checks", []) if c["name"] == name), None)
        self.compare(f"check {name}", None if check is None else check["measured"], recomputed)

    def compare_rows(self, label: str, rows: Sequence[dict], times: np.ndarray, dist: np.ndarray,
                     bound: Optional[np.ndarray] = None) -> None:
        if len(rows) != len(times):
            self.flag(f"{label}: {len(rows)} rows, {len(times)} recorded times")
            return
        for index, row in enumerate(rows):
            self.compare(f"{label} t={row['t']:g} time", row["t"], float(times[index]))
            self.compare(f"{label} t={row['t']:g} dist", row["dist"], float(dist[index]))
            if bound is not None and not math.isnan(_as_float(row["bound"])):
                self.compare(f"{label} t={row['t']:g} bound", row["bound"], float(bound[index]))

    def check_residual(self, label: str, residual: float) -> None:
        if residual > RESIDUAL_TOLERANCE:
            self.flag(f"{label}: identity residual {residual:.3g} exceeds {RESIDUAL_TOLERANCE:g}")


def load_records(records: List[dict], grid: ModeGrid, epsilon: float) -> Dict[int, TrajectoryRecord]:
    """
    Rebuild one TrajectoryRecord per member from trajectories.jsonl records.

    Raises:
        ConfigurationError: If a record carries no state
    """
    grouped: Dict[int, Dict[str, list]] = defaultdict(lambda: defaultdict(list))
    for record in records:
        if "state" not in record:
            raise ConfigurationError("trajectory records carry no states; nothing can be recomputed")
        grouped[int(record["member"])][record["component"]].append(record)

    rebuilt = {}
    for member, components in grouped.items():
        first = next(iter(components.values()))
        rebuilt[member] = TrajectoryRecord(
            grid=grid,
            epsilon=epsilon,
            times=np.array([_as_float(r["t"]) for r in first]),
            states={
                name: [PhaseState.from_dict(grid, r["state"]) for r in series] for name, series in components.items()
            },
            identity_residuals=np.array([_as_float(r["residual"]) for r in first]),
        )
    return rebuilt


def _members(records: Dict[int, TrajectoryRecord], span: Sequence[int]) -> List[TrajectoryRecord]:
    start, stop = span
    missing = [m for m in range(start, stop) if m not in records]
    if missing:
        raise ConfigurationError(f"trajectories lack members {missing[:5]}")
    return [records[m] for m in range(start, stop)]


def _split_residual(records: List[TrajectoryRecord], first: str, second: str) -> float:
    """max_t ||full - first - second||_H recomputed from the states."""
    worst = 0.0
    for record in records:
        for full, a, b in zip(record.states[FULL], record.states[first], record.states[second]):
            worst = max(worst, stacked_norm((full - a - b).as_array(), record.grid))
    return worst


def recompute_e1(check: Recomputation, config: RunConfig, trajectories: List[dict]) -> None:
    """Decay rows of the representative family from the stored points S(t)x."""
    cert = check.data["certificates"]["decay"]
    by_time: Dict[float, List[np.ndarray]] = defaultdict(list)
    for record in trajectories:
        if "state" not in record:
            raise ConfigurationError("trajectory records carry no states; nothing can be recomputed")
        by_time[_as_float(record["t"])].append(np.array(record["state"]["coords"], dtype=float))
    times = np.array(sorted(by_time))
    dist = np.array([max(max(np.linalg.norm(y) - cert["rho"], 0.0) for y in by_time[t]) for t in times])
    bound = cert["K"] * np.exp(-cert["omega"] * times)
    check.compare_rows("decay row", check.decay_rows, times, dist, bound)


def recompute_e2(check: Recomputation, config: RunConfig, trajectories: List[dict]) -> None:
    """c0, the hat_v rate fit and the decay rows from the hat-split states."""
    grid = config.build_grid()
    records = _members(load_records(trajectories, grid, config.epsilon_energy),
                       check.data["tables"]["trajectory_members"]["ensemble"])
    times = records[0].times
    zero = [PhaseState.zeros(grid)]
    # sup over members of ||hat_v(t)||_H is the semidistance of the ensemble slice to {0}.
    worst = np.array([semidist([r.states[HAT_V][i] for r in records], zero, 0.0) for i in range(times.size)])
    full = np.array([record.norm_series(FULL, 0.0) for record in records])

    c0 = float(np.max(full))
    c0_half = float(np.max(full[:, times <= 0.5 * times[-1]]))
    window = times >= config.fit_start_fraction * times[-1]
    fit = fit_rate(times[window], worst[window])
    envelope = float(np.max(worst * np.exp(fit.omega * times)))

    fitted = check.data["fitted"]
    check.compare("fitted c0", fitted.get("c0"), c0)
    check.compare("fitted nu0", fitted.get("nu0"), fit.omega)
    check.compare("fitted hat_v_fit C", fitted.get("hat_v_fit", {}).get("C"), fit.C)
    check.compare_check("uniform_bound_stability", abs(c0 - c0_half) / max(c0, 1e-300))
    check.compare_check("hat_v_decay_rate", fit.omega)
    check.compare_rows("decay row", check.decay_rows, times, worst, envelope * np.exp(-fit.omega * times))
    check.check_residual("hat split", _split_residual(records, HAT_V, HAT_W))


def recompute_e3(check: Recomputation, config: RunConfig, trajectories: List[dict]) -> None:
    """Stage distances, enclosures and the v-rate fit from the V/U and linear-split states."""
    grid = config.build_grid()
    loaded = load_records(trajectories, grid, config.epsilon_energy)
    groups = check.data["tables"]["trajectory_members"]
    base = _members(loaded, groups["stage1_base"])
    directed = _members(loaded, groups["stage1_directions"])
    stage_two = _members(loaded, groups["stage2"])
    certificates = check.data["certificates"]
    fitted = check.data["fitted"]

    for label, records, cert, r, rows in (
        ("stage1", base, certificates["stage1"], QUARTER, check.decay_rows),
        ("stage2", stage_two, certificates["stage2"], 1.0, check.data["tables"]["stage2_decay"]),
    ):
        times = records[0].times
        distances = distances_to_ball(records, cert["rho"], NormSpec(grid, 0.0, r))
        bound = cert["K"] * np.exp(-cert["omega"] * times)
        enclosure = late_enclosure(records, r)
        check.compare_check(f"{label}_decay_excess", float(np.max(distances - bound[None, :])))
        check.compare_check(f"{label}_enclosure", enclosure)
        check.compare(f"fitted {label} enclosure_radius", fitted[label].get("enclosure_radius"), enclosure)
        check.compare_rows(f"{label} decay row", rows, times, np.max(distances, axis=0), bound)

    times = base[0].times
    alpha_data = np.max(v_ratio_rows(base + directed), axis=0)
    window = times >= config.fit_start_fraction * times[-1]
    v_rate = fit_rate(times[window], alpha_data[window])
    check.compare("fitted stage1 v_rate omega", fitted["stage1"]["v_rate"].get("omega"), v_rate.omega)
    check.compare_check("stage1_v_decay_rate", v_rate.omega)

    check.check_residual("stage1 V/U split", _split_residual(base + directed, V, W))
    check.check_residual("stage1 hat split", _split_residual(base + directed, HAT_V, HAT_W))
    check.check_residual("stage2 linear split", _split_residual(stage_two, HAT_V, HAT_W))


def recompute_e4(check: Recomputation, config: RunConfig, trajectories: List[dict]) -> None:
    """Per-radius distance fits, rate gaps and prefactor order from the radius ensembles."""
    grid = config.build_grid()
    loaded = load_records(trajectories, grid, config.epsilon_energy)
    rho = _as_float(check.data["fitted"]["rho"])
    spec = NormSpec(grid, 0.0, 1.0)
    rows = check.data["tables"]["radii"]

    fits = []
    for index, row in enumerate(rows):
        records = _members(loaded, row["members"])
        times = records[0].times
        worst = worst_distance(records, rho, spec)
        label = f"radius {row['radius']:g}"
        if row["omega"] is None:
            fits.append(None)
            continue
        fit = fit_distance_rate(times, worst)
        fits.append(fit)
        check.compare(f"{label} omega", row["omega"], fit.omega)
        check.compare(f"{label} prefactor", row["prefactor"], fit.envelope_constant)
        if index == len(rows) - 1:
            check.compare_rows("decay row", check.decay_rows, times, worst, fit.envelope(times))

    fitted = [(row, fit) for row, fit in zip(rows, fits) if fit is not None]
    if fitted:
        reference = fitted[0][1].omega
        for row, fit in fitted[1:]:
            gap = abs(fit.omega - reference) / abs(reference) if reference else float("inf")
            check.compare_check(f"rate_agreement_R{row['factor']:g}", gap)
        prefactors = [fit.envelope_constant for _, fit in fitted]
        check.compare_check("prefactor_monotone", float(sum(b < a for a, b in zip(prefactors, prefactors[1:]))))


RECOMPUTE: Dict[str, Callable[[Recomputation, RunConfig, List[dict]], None]] = {
    "E1": recompute_e1,
    "E2": recompute_e2,
    "E3": recompute_e3,
    "E4": recompute_e4,
}


def verify_run(report_path: Path) -> List[str]:
    """
    Check a report.json against itself and its sibling files.

    Recomputes each check's comparator, the report content hash, the config
    hash, every decay row (dist <= bound where the bound is finite) and the
    identity residuals recorded in trajectories.jsonl. The recorded states
    are then used to recompute the experiment's rate fits and distances,
    which must match report.json and decay.csv to a relative 1e-9.

    Args:
        report_path: Path to report.json

    Returns:
        Human-readable problems; empty when the run verifies

    Raises:
        ConfigurationError: If report.json is missing or unparsable
    """
    report_path = Path(report_path)
    try:
        data = read_report(report_path)
    except (OSError, ValueError) as e:
        raise ConfigurationError(f"cannot read report {report_path}: {e}") from e

    problems = []
    for check in data.get("checks", []):
        comparator = COMPARATORS.get(check["comparator"])
        if comparator is None:
            problems.append(f"{check['name']}: unknown comparator {check['comparator']}")
            continue
        passed = bool(comparator(_as_float(check["measured"]), _as_float(check["threshold"])))
        if passed != check["passed"]:
            problems.append(f"{check['name']}: recorded passed={check['passed']}, recomputed {passed}")
        if not passed:
            problems.append(
                f"{check['name']}: {check['measured']} {check['comparator']} {check['threshold']} does not hold"
            )

    provenance = data.get("provenance", {})
    recorded_hash = provenance.get("report_hash")
    if recorded_hash != content_hash(strip_volatile(data)):
        problems.append("report_hash does not match the report content")

    config = None
    try:
        config = RunConfig.model_validate(data.get("config", {}))
        if config.config_hash() != provenance.get("config_hash"):
            problems.append("config_hash does not match the recorded configuration")
    except ValidationError as e:
        problems.append(f"recorded configuration no longer validates: {e.error_count()} error(s)")

    decay_path = report_path.with_name(DECAY_FILE)
    decay_rows: List[Dict[str, float]] = []
    if decay_path.exists():
        decay_rows = read_decay_table(decay_path)
        for row in decay_rows:
            if math.isnan(row["bound"]):
                continue
            if row["dist"] > row["bound"] * (1 + DECAY_RTOL) + DECAY_ATOL:
                problems.append(f"decay row t={row['t']:g}: dist {row['dist']:.6g} > bound {row['bound']:.6g}")
    else:
        problems.append(f"missing {DECAY_FILE}")

    trajectory_path = report_path.with_name(TRAJECTORY_FILE)
    if not trajectory_path.exists():
        problems.append(f"missing {TRAJECTORY_FILE}")
    else:
        trajectories = read_trajectories(trajectory_path)
        worst = max((_as_float(record["residual"]) for record in trajectories), default=0.0)
        if worst > RESIDUAL_TOLERANCE:
            problems.append(f"identity residual {worst:.3g} exceeds {RESIDUAL_TOLERANCE:g}")

        recompute = RECOMPUTE.get(data.get("experiment"))
        if config is not None and recompute is not None and decay_path.exists():
            check = Recomputation(data, decay_rows)
            try:
                recompute(check, config, trajectories)
            except (AttractorLabError, KeyError, TypeError, ValueError, IndexError) as e:
                check.flag(f"cannot recompute {data.get('experiment')}: {e}")
            problems.extend(check.problems)

    logger.debug(f"verified {report_path}: {len(problems)} problem(s)")
    return problems
