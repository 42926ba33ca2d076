"""Experiment reports: checks with measured values, certificates and provenance."""

from __future__ import annotations

import hashlib
import json
import operator
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

import numpy as np

from attractor_lab import __version__

COMPARATORS = {
    "<=": operator.le,
    "<": operator.lt,
    ">=": operator.ge,
    ">": operator.gt,
    "==": operator.eq,
}


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if np.isnan(value):
            return "nan"
        if np.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


@dataclass(frozen=True)
class CheckResult:
    """
    A pass/fail check with the numbers behind it.

    ``passed`` is always comparator(measured, threshold).
    """

    name: str
    measured: float
    threshold: float
    comparator: str
    passed: bool
    detail: str = ""

    @classmethod
    def compare(cls, name: str, measured: float, comparator: str, threshold: float, detail: str = "") -> "CheckResult":
        if comparator not in COMPARATORS:
            raise ValueError(f"unknown comparator '{comparator}'")
        measured, threshold = float(measured), float(threshold)
        passed = bool(COMPARATORS[comparator](measured, threshold))
        return cls(name=name, measured=measured, threshold=threshold, comparator=comparator, passed=passed, detail=detail)

    def to_dict(self) -> dict:
        return to_jsonable(
            {
                "name": self.name,
                "measured": self.measured,
                "threshold": self.threshold,
                "comparator": self.comparator,
                "passed": self.passed,
                "detail": self.detail,
            }
        )


@dataclass
class ExperimentReport:
    """
    Outcome of one experiment.

    ``trajectories`` (JSON-lines records) and ``decay_table`` rows are written
    to their own files; everything else goes into report.json.
    """

    experiment: str
    config_hash: str
    seed: int
    config: Dict[str, Any] = field(default_factory=dict)
    certificates: Dict[str, Any] = field(default_factory=dict)
    fitted: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, Any] = field(default_factory=dict)
    decay_table: List[Dict[str, float]] = field(default_factory=list)
    checks: List[CheckResult] = field(default_factory=list)
    trajectories: List[dict] = field(default_factory=list)
    code_version: str = __version__
    timestamp: Optional[str] = None

    def add_check(self, name: str, measured: float, comparator: str, threshold: float, detail: str = "") -> CheckResult:
        check = CheckResult.compare(name, measured, comparator, threshold, detail)
        self.checks.append(check)
        return check

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed_checks(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def content(self) -> dict:
        """Report body without the timestamp or content hash."""
        return to_jsonable(
            {
                "experiment": self.experiment,
                "seed": self.seed,
                "config": self.config,
                "certificates": self.certificates,
                "fitted": self.fitted,
                "tables": self.tables,
                "decay_table": self.decay_table,
                "checks": [check.to_dict() for check in self.checks],
                "passed": self.passed,
                "provenance": {"config_hash": self.config_hash, "code_version": self.code_version},
            }
        )

    def content_hash(self) -> str:
        return content_hash(self.content())

    def to_dict(self) -> dict:
        data = self.content()
        data["provenance"]["timestamp"] = self.timestamp or datetime.now(timezone.utc).isoformat()
        data["provenance"]["report_hash"] = self.content_hash()
        return data


def content_hash(content: dict) -> str:
    text = json.dumps(content, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def strip_volatile(data: dict) -> dict:
    """Inverse of ExperimentReport.to_dict's provenance additions."""
    body = json.loads(json.dumps(data))
    provenance = body.get("provenance", {})
    provenance.pop("timestamp", None)
    provenance.pop("report_hash", None)
    return body
