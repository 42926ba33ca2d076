"""Write run directories: report.json, trajectories.jsonl and decay.csv."""

import csv
import io
import json
import os
from pathlib import Path
from typing import Dict, List

from attractor_lab.experiments.report import ExperimentReport, to_jsonable

REPORT_FILE = "report.json"
TRAJECTORY_FILE = "trajectories.jsonl"
DECAY_FILE = "decay.csv"
DECAY_COLUMNS = ("t", "dist", "bound")


class RunWriter:
    """Writer for experiment run directories."""

    def __init__(self, output_path: Path):
        """
        Initialize run writer.

        Args:
            output_path: Base output directory for run directories
        """
        self.output_path = output_path

    def run_directory(self, report: ExperimentReport) -> Path:
        """Directory named by experiment id and configuration hash prefix."""
        return self.output_path / f"{report.experiment}-{report.config_hash[:12]}"

    def write_run(self, report: ExperimentReport) -> Dict[str, Path]:
        """
        Write all files of a run.

        Identical reports produce byte-identical files apart from the
        provenance timestamp.

        Args:
            report: Experiment report

        Returns:
            Mapping of file kind to written path

        Raises:
            IOError: If a file cannot be written
        """
        run_dir = self.run_directory(report)
        run_dir.mkdir(parents=True, exist_ok=True)

        paths = {
            "report": run_dir / REPORT_FILE,
            "trajectories": run_dir / TRAJECTORY_FILE,
            "decay": run_dir / DECAY_FILE,
        }
        self._atomic_write(paths["report"], json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n")
        self._atomic_write(paths["trajectories"], self._jsonl(report.trajectories))
        self._atomic_write(paths["decay"], self._csv(report.decay_table))
        return paths

    def _jsonl(self, records: List[dict]) -> str:
        return "".join(json.dumps(to_jsonable(record), sort_keys=True) + "\n" for record in records)

    def _csv(self, rows: List[dict]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(DECAY_COLUMNS)
        for row in rows:
            writer.writerow([repr(float(row[column])) for column in DECAY_COLUMNS])
        return buffer.getvalue()

    def _atomic_write(self, path: Path, content: str) -> None:
        """Write to a temporary sibling, then rename over the target."""
        tmp = path.with_name(path.name + ".tmp")
        try:
            tmp.write_text(content, encoding="utf-8")
            os.replace(tmp, path)
        except OSError as e:
            tmp.unlink(missing_ok=True)
            raise IOError(f"Failed to write {path}: {e}") from e


def write_run(report: ExperimentReport, output_path: Path) -> Dict[str, Path]:
    """Convenience function to write a run directory."""
    return RunWriter(output_path).write_run(report)


def read_report(path: Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def read_trajectories(path: Path) -> List[dict]:
    with open(path, encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]


def read_decay_table(path: Path) -> List[Dict[str, float]]:
    with open(path, encoding="utf-8", newline="") as handle:
        return [{key: float(value) for key, value in row.items()} for row in csv.DictReader(handle)]
