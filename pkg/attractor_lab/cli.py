"""Command-line interface for attractor-lab."""

import json
import sys
from pathlib import Path
from typing import Optional

import click
from pydantic import ValidationError

from attractor_lab import __version__
from attractor_lab.certificates.constants import entering_time, main_constants, select_t_star, tec_constants
from attractor_lab.certificates.functions import DecayFn, GrowthFn
from attractor_lab.config import get_settings
from attractor_lab.db.run_registry import RunRegistry
from attractor_lab.errors import (
    AttractorLabError,
    CertificateUnavailableError,
    ConfigurationError,
    DegenerateCertificateError,
    PreconditionError,
)
from attractor_lab.experiments.report import to_jsonable
from attractor_lab.experiments.run_config import RunConfig
from attractor_lab.experiments.runner import DESCRIPTIONS, run_experiment
from attractor_lab.experiments.verification import verify_run
from attractor_lab.output.writers import RunWriter
from attractor_lab.utils.logging_config import setup_logging

EXIT_FAILED = 1
EXIT_CONFIG = 2


def _header(title: str) -> None:
    click.echo("\n" + "=" * 60)
    click.echo(f"  attractor-lab - {title}")
    click.echo("=" * 60 + "\n")


def _config_error(message: str) -> None:
    click.echo(f"✗ Configuration error: {message}", err=True)
    sys.exit(EXIT_CONFIG)


def _fatal(e: Exception, verbose: bool) -> None:
    click.echo(f"\n✗ Fatal error: {e}", err=True)
    if verbose:
        import traceback
        traceback.print_exc()
    sys.exit(EXIT_FAILED)


@click.group()
@click.version_option(__version__, prog_name="attractor-lab")
def main():
    """
    attractor-lab - certify and measure attraction in damped wave flows.

    Runs the E1-E4 experiments from JSON run configurations, writes
    report.json, trajectories.jsonl and decay.csv, and re-verifies them.

    Examples:

        \b
        # Run an experiment
        attractor-lab run --config configs/e2.json

        \b
        # Re-check a finished run
        attractor-lab verify --report runs/E2-0123456789ab/report.json

        \b
        # Certificate constants for an exponential decay
        attractor-lab certify --beta exp:1,1,0.5 --J const:10 --tstar auto
    """


@main.command()
@click.option(
    "--config",
    "-c",
    "config_path",
    required=True,
    type=click.Path(path_type=Path),
    help="Run configuration (JSON)",
)
@click.option(
    "--out",
    "-o",
    default=None,
    type=click.Path(path_type=Path),
    help="Output directory (default: run config, then ATTRACTOR_LAB_OUTPUT_DIR)",
)
@click.option(
    "--seed",
    "-s",
    default=None,
    type=click.IntRange(0, 2**64 - 1),
    help="Override the seed in the run configuration",
)
@click.option(
    "--force",
    "-f",
    is_flag=True,
    help="Re-run a configuration that already passed",
)
@click.option(
    "--workers",
    "-w",
    default=None,
    type=click.IntRange(1, 64),
    help="Threads for ensemble members (default: run config, then ATTRACTOR_LAB_MAX_WORKERS)",
)
@click.option(
    "--verbose",
    "-v",
    is_flag=True,
    help="Enable verbose output",
)
@click.option(
    "--dry-run",
    is_flag=True,
    help="Validate the configuration and show what would run",
)
def run(
    config_path: Path,
    out: Optional[Path],
    seed: Optional[int],
    force: bool,
    workers: Optional[int],
    verbose: bool,
    dry_run: bool,
):
    """Run one experiment and write its outputs."""
    try:
        try:
            settings = get_settings()
        except RuntimeError as e:
            _config_error(str(e))
        setup_logging(settings.log_file, verbose=verbose)

        try:
            config = RunConfig.from_file(config_path)
            if seed is not None:
                config = config.with_seed(seed)
        except ConfigurationError as e:
            _config_error(str(e))
        except ValidationError as e:
            _config_error(f"{config_path}\n{e}")

        output_dir = out or config.output_dir or settings.output_dir
        if workers is None:
            workers = config.workers if "workers" in config.model_fields_set else settings.max_workers
        config_hash = config.config_hash()

        _header(f"{config.experiment} ({DESCRIPTIONS[config.experiment]})")
        click.echo("Configuration:")
        click.echo(f"  Config: {config_path}")
        click.echo(f"  Seed: {config.seed}")
        click.echo(f"  Config Hash: {config_hash[:12]}")
        click.echo(f"  Output Path: {output_dir}")
        click.echo(f"  Workers: {workers}")
        if force:
            click.echo("  Force Re-run: Enabled")
        if dry_run:
            click.echo("  Dry Run: Enabled (nothing will be computed)")
        click.echo()

        with RunRegistry(settings.registry_path) as registry:
            if not force and registry.is_recorded(config_hash):
                click.echo("✓ Configuration already ran and passed (use --force to re-run)")
                return

        if dry_run:
            if config.experiment == "E1":
                click.echo(f"  Synthetic families: {config.synthetic.families} (+{config.synthetic.adversarial} adversarial)")
            else:
                evolution = config.evolution_config()
                click.echo(f"  Grid: {evolution.grid.shape}, dt = {evolution.dt:g} (limit {evolution.dt_limit:.3g})")
                click.echo(f"  Steps: {evolution.n_steps}, ensemble size {config.ensemble_size}")
            click.echo("\nDry run complete. Nothing computed.")
            return

        click.echo(f"⏳ Running {config.experiment}...")
        report = run_experiment(config, workers=workers)

        click.echo("⏳ Writing outputs...")
        paths = RunWriter(output_dir).write_run(report)

        with RunRegistry(settings.registry_path) as registry:
            registry.record_run(
                config_hash=config_hash,
                experiment=config.experiment,
                seed=config.seed,
                report_path=paths["report"],
                failed_checks=len(report.failed_checks),
                passed=report.passed,
            )

        click.echo("\nChecks:")
        for check in report.checks:
            glyph = "✓" if check.passed else "✗"
            click.echo(f"  {glyph} {check.name}: {check.measured:.6g} {check.comparator} {check.threshold:.6g}")

        click.echo("\n" + "=" * 60)
        click.echo(f"\n✓ Saved: {paths['report']}")
        if not report.passed:
            click.echo(f"✗ {len(report.failed_checks)}/{len(report.checks)} check(s) failed", err=True)
            sys.exit(EXIT_FAILED)
        click.echo(f"\n✨ All {len(report.checks)} checks passed\n")

    except KeyboardInterrupt:
        click.echo("\n\n✗ Interrupted by user", err=True)
        sys.exit(EXIT_FAILED)
    except ConfigurationError as e:
        _config_error(str(e))
    except AttractorLabError as e:
        click.echo(f"\n✗ Error: {e}", err=True)
        sys.exit(EXIT_FAILED)
    except Exception as e:
        _fatal(e, verbose)


@main.command()
@click.option(
    "--report",
    "-r",
    "report_path",
    required=True,
    type=click.Path(path_type=Path),
    help="Path to report.json",
)
def verify(report_path: Path):
    """Re-evaluate every check of a written run."""
    try:
        problems = verify_run(report_path)
    except ConfigurationError as e:
        _config_error(str(e))

    if problems:
        for problem in problems:
            click.echo(f"✗ {problem}")
        sys.exit(EXIT_FAILED)
    click.echo(f"✓ {report_path} verifies")


@main.command()
@click.option("--beta", "beta_spec", required=True, help="Decay function: exp:a,b,c | const:c | table:t=v;...[|limit]")
@click.option("--J", "j_spec", required=True, help="Growth function: const:c | affine:p,q | sat:p,q,r | table:t=v;...")
@click.option("--tstar", "t_star_text", default="auto", show_default=True, help="t_star value or 'auto'")
@click.option("--margin", default=0.5, show_default=True, type=float, help="Margin for --tstar auto")
@click.option("--alpha", "alpha_spec", default=None, help="Decay function of the V-part (needs --r0)")
@click.option("--r0", default=None, type=float, help="Radius of the initial ball")
@click.option("--radius", default=None, type=float, help="Report the entering time of B(radius)")
@click.option("--json", "as_json", is_flag=True, help="Print JSON instead of a table")
def certify(
    beta_spec: str,
    j_spec: str,
    t_star_text: str,
    margin: float,
    alpha_spec: Optional[str],
    r0: Optional[float],
    radius: Optional[float],
    as_json: bool,
):
    """Print certificate constants for the given beta and J."""
    if (alpha_spec is None) != (r0 is None):
        raise click.UsageError("--alpha and --r0 must be given together")

    try:
        beta = DecayFn.parse(beta_spec)
        growth = GrowthFn.parse(j_spec)
        alpha = DecayFn.parse(alpha_spec) if alpha_spec else None
        choice = None
        if t_star_text == "auto":
            choice = select_t_star(beta, margin)
            t_star = choice.t_star
        else:
            try:
                t_star = float(t_star_text)
            except ValueError as e:
                raise ConfigurationError(f"--tstar must be a number or 'auto', got '{t_star_text}'") from e
    except ConfigurationError as e:
        _config_error(str(e))
    except CertificateUnavailableError as e:
        click.echo(f"✗ No certificate: {e}", err=True)
        sys.exit(EXIT_FAILED)

    try:
        cert = tec_constants(beta, growth, t_star)
        result = {"tec": cert.to_dict()}
        if choice is not None:
            result["t_star_choice"] = choice.to_dict()
        if alpha is not None:
            result["attraction"] = main_constants(alpha, beta, growth, r0, t_star).to_dict()
        if radius is not None:
            steps, t_radius = entering_time(radius, cert)
            result["entering"] = {"radius": radius, "n_R": steps, "t_R": t_radius}
    except (PreconditionError, DegenerateCertificateError) as e:
        click.echo(f"✗ No certificate: {e}", err=True)
        sys.exit(EXIT_FAILED)

    if as_json:
        click.echo(json.dumps(to_jsonable(result), sort_keys=True, indent=2))
        return

    click.echo("Absorbing-ball certificate:")
    for key, value in result["tec"].items():
        if key == "residuals":
            continue
        click.echo(f"  {key:<18} {value:.9g}")
    residual = max(result["tec"]["residuals"].values())
    click.echo(f"  {'max residual':<18} {residual:.3g}")
    if choice is not None and choice.target_relaxed:
        click.echo(f"  {'target relaxed':<18} {choice.requested_target:.6g} -> {choice.target:.6g}")
    if "attraction" in result:
        click.echo("\nAttraction certificate:")
        for key in ("rho", "K", "omega", "alpha_star", "alpha_zero", "R0"):
            click.echo(f"  {key:<18} {result['attraction'][key]:.9g}")
    if "entering" in result:
        entering = result["entering"]
        click.echo(f"\nEntering time for R = {entering['radius']:g}:")
        click.echo(f"  {'n_R':<18} {entering['n_R']}")
        click.echo(f"  {'t_R':<18} {entering['t_R']:.9g}")


@main.command()
def history():
    """Show run registry statistics."""
    try:
        settings = get_settings()
    except RuntimeError as e:
        _config_error(str(e))

    with RunRegistry(settings.registry_path) as registry:
        stats = registry.get_stats()

    _header("Run History")
    click.echo(f"Total Runs: {stats['total_runs']}")
    click.echo(f"Passed: {stats['passed_runs']}")
    click.echo(f"Failed: {stats['failed_runs']}")
    if stats["latest_run"]:
        click.echo(f"Latest Run: {stats['latest_run']}")

    if stats["runs_per_experiment"]:
        click.echo("\nRuns per Experiment:")
        for experiment, count in stats["runs_per_experiment"].items():
            click.echo(f"  - {experiment}: {count}")

    click.echo()


if __name__ == "__main__":
    main()
