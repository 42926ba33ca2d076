"""Environment-level settings for attractor-lab using Pydantic."""

import os
from pathlib import Path
from typing import List, Optional

from pydantic import Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

STATE_DIR = Path.home() / ".attractor_lab"


def env_file_candidates() -> List[Path]:
    """Places searched for a .env file, in order: cwd, ~/.attractor_lab, project root."""
    return [
        Path.cwd() / ".env",
        STATE_DIR / ".env",
        Path(__file__).resolve().parent.parent / ".env",
    ]


def find_env_file() -> Optional[Path]:
    """First existing .env among ``env_file_candidates()``, or None."""
    return next((path for path in env_file_candidates() if path.exists()), None)


class Settings(BaseSettings):
    """
    Settings loaded from ATTRACTOR_LAB_* environment variables.

    These only decide where runs go and how they are executed; nothing here
    enters a run's configuration hash.
    """

    output_dir: Path = Field(
        default=Path("runs"),
        description="Base directory for run outputs (report.json, trajectories.jsonl, decay.csv)",
    )
    registry_path: Path = Field(
        default=STATE_DIR / "registry.db",
        description="Sqlite registry of completed runs",
    )
    log_file: Optional[Path] = Field(
        default=None,
        description="Log file (default: ~/.attractor_lab/attractor_lab.log)",
    )
    max_workers: int = Field(
        default=1,
        ge=1,
        le=64,
        description="Threads used to evolve ensemble members concurrently",
    )

    model_config = SettingsConfigDict(
        env_prefix="ATTRACTOR_LAB_",
        env_file=find_env_file(),
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("output_dir", "registry_path", "log_file", mode="before")
    @classmethod
    def expand_path(cls, v: Optional[str]) -> Optional[Path]:
        """Expand ~ and $VARS."""
        if v is None or v == "":
            return None
        return Path(os.path.expandvars(os.path.expanduser(str(v))))


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """
    Cached settings; built on first use.

    Raises:
        RuntimeError: If an ATTRACTOR_LAB_* value does not validate
    """
    global _settings
    if _settings is not None:
        return _settings

    try:
        _settings = Settings()
    except ValidationError as e:
        source = find_env_file() or "environment only (no .env found)"
        raise RuntimeError(
            f"Invalid attractor-lab settings: {e}\n\n"
            f"Check the ATTRACTOR_LAB_* variables. Source: {source}"
        ) from e
    return _settings


def reset_settings() -> None:
    """Drop the cached settings so the next call re-reads the environment."""
    global _settings
    _settings = None
