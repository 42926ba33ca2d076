"""Registry of completed experiment runs."""

import sqlite3
from datetime import datetime
from pathlib import Path
from typing import List, Optional, Tuple


class RunRegistry:
    """Sqlite registry keyed by configuration hash."""

    SCHEMA = """
        CREATE TABLE IF NOT EXISTS runs (
            config_hash TEXT PRIMARY KEY,
            experiment TEXT NOT NULL,
            seed TEXT NOT NULL,
            recorded_timestamp TEXT NOT NULL,
            report_path TEXT NOT NULL,
            failed_checks INTEGER NOT NULL DEFAULT 0,
            passed BOOLEAN NOT NULL DEFAULT 1
        );

        CREATE INDEX IF NOT EXISTS idx_experiment
        ON runs(experiment);

        CREATE INDEX IF NOT EXISTS idx_recorded_timestamp
        ON runs(recorded_timestamp);

        CREATE INDEX IF NOT EXISTS idx_passed
        ON runs(passed);
    """

    def __init__(self, db_path: Path):
        """
        Initialize the run registry.

        Args:
            db_path: Path to the registry database file
        """
        self.db_path = db_path
        self._conn: Optional[sqlite3.Connection] = None

        db_path.parent.mkdir(parents=True, exist_ok=True)
        self._initialize_schema()

    def __enter__(self):
        self.connect()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()

    def _initialize_schema(self) -> None:
        conn = sqlite3.connect(self.db_path)
        try:
            conn.executescript(self.SCHEMA)
            conn.commit()
        finally:
            conn.close()

    def connect(self) -> None:
        """Open database connection."""
        if self._conn is None:
            self._conn = sqlite3.connect(self.db_path)
            self._conn.row_factory = sqlite3.Row

    def close(self) -> None:
        """Close database connection."""
        if self._conn is not None:
            self._conn.close()
            self._conn = None

    def _require_connection(self) -> sqlite3.Connection:
        if self._conn is None:
            raise RuntimeError("Database not connected. Call connect() first.")
        return self._conn

    def is_recorded(self, config_hash: str) -> bool:
        """
        Check whether a configuration already has a passing run.

        Args:
            config_hash: SHA-256 of the canonical run configuration

        Returns:
            True if a passing run with this hash is recorded
        """
        conn = self._require_connection()
        cursor = conn.execute("SELECT 1 FROM runs WHERE config_hash = ? AND passed = 1", [config_hash])
        return cursor.fetchone() is not None

    def record_run(
        self,
        config_hash: str,
        experiment: str,
        seed: int,
        report_path: Path,
        failed_checks: int,
        passed: bool,
    ) -> None:
        """
        Record (or replace) a run.

        Args:
            config_hash: SHA-256 of the canonical run configuration
            experiment: Experiment id (E1-E4)
            seed: Run seed (stored as text, it may exceed sqlite's integer range)
            report_path: Path to report.json
            failed_checks: Number of failed checks
            passed: Whether every check passed
        """
        conn = self._require_connection()
        try:
            conn.execute(
                """
                INSERT OR REPLACE INTO runs
                (config_hash, experiment, seed, recorded_timestamp, report_path, failed_checks, passed)
                VALUES (?, ?, ?, ?, ?, ?, ?)
                """,
                [
                    config_hash,
                    experiment,
                    str(seed),
                    datetime.now().isoformat(),
                    str(report_path),
                    int(failed_checks),
                    1 if passed else 0,
                ],
            )
            conn.commit()
        except sqlite3.Error as e:
            raise RuntimeError(f"Failed to record run: {e}") from e

    def get_runs(self, experiment: Optional[str] = None) -> List[Tuple[str, str, str, bool]]:
        """
        List recorded runs, newest first.

        Args:
            experiment: Optional experiment id filter

        Returns:
            List of (config_hash, experiment, timestamp, passed) tuples
        """
        conn = self._require_connection()
        query = "SELECT config_hash, experiment, recorded_timestamp, passed FROM runs"
        params = []
        if experiment:
            query += " WHERE experiment = ?"
            params.append(experiment)
        query += " ORDER BY recorded_timestamp DESC"

        cursor = conn.execute(query, params)
        return [
            (row["config_hash"], row["experiment"], row["recorded_timestamp"], bool(row["passed"]))
            for row in cursor.fetchall()
        ]

    def get_stats(self) -> dict:
        """
        Get registry statistics.

        Returns:
            Dictionary with total_runs, passed_runs, failed_runs, runs_per_experiment, latest_run
        """
        conn = self._require_connection()
        stats = {}

        stats["total_runs"] = conn.execute("SELECT COUNT(*) as count FROM runs").fetchone()["count"]
        stats["passed_runs"] = conn.execute("SELECT COUNT(*) as count FROM runs WHERE passed = 1").fetchone()["count"]
        stats["failed_runs"] = stats["total_runs"] - stats["passed_runs"]

        cursor = conn.execute(
            """
            SELECT experiment, COUNT(*) as count
            FROM runs
            GROUP BY experiment
            ORDER BY experiment
            """
        )
        stats["runs_per_experiment"] = {row["experiment"]: row["count"] for row in cursor.fetchall()}

        latest = conn.execute("SELECT MAX(recorded_timestamp) as latest FROM runs").fetchone()["latest"]
        stats["latest_run"] = latest if latest else None
        return stats

    def remove_run(self, config_hash: str) -> bool:
        """
        Remove a run from the registry.

        Returns:
            True if the run was removed, False if not found
        """
        conn = self._require_connection()
        cursor = conn.execute("DELETE FROM runs WHERE config_hash = ?", [config_hash])
        conn.commit()
        return cursor.rowcount > 0


def is_run_recorded(db_path: Path, config_hash: str) -> bool:
    """Convenience function to check for a passing run."""
    with RunRegistry(db_path) as registry:
        return registry.is_recorded(config_hash)
