"""
Lab Configuration
Environment, .env and JSON-file settings shared by every subcommand.
"""

import os
from pathlib import Path
from typing import Any, Optional

import orjson
from dotenv import load_dotenv
from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from scripts.numkit import LabError

# Load environment variables
load_dotenv()

REPORT_DIR = os.getenv("LAB_REPORT_DIR", "lab_reports")
LOG_LEVEL = os.getenv("LAB_LOG_LEVEL", "WARNING")
LOG_JSON = os.getenv("LAB_LOG_JSON", "false").lower() in ("1", "true", "yes")


class ConfigError(LabError, ValueError):
    """Malformed configuration file or an invalid combination of settings."""


class LabSettings(BaseSettings):
    """Numerical knobs; every field can be set through a LAB_<NAME> variable."""

    model_config = SettingsConfigDict(env_prefix="LAB_", env_file=".env", extra="ignore")

    tol: Optional[float] = Field(default=None, gt=0.0, description="Tolerance applied to every check when set")
    seed: int = Field(default=20240101, description="Seed for randomized checks")
    quad_limit: int = Field(default=200, gt=0, description="QUADPACK subdivision budget per contour piece")
    indent_radius: float = Field(default=0.1, gt=0.0, le=0.1, description="Pole indentation radius cap")
    sl_steps: int = Field(default=4000, ge=200, description="Magnus steps on [0, pi] for Sturm-Liouville shooting")
    cutoff_threshold: float = Field(default=1e-12, gt=0.0, description="|v| below which a decaying potential is cut off")
    gl_order: int = Field(default=16, ge=4, description="Gauss-Legendre order per panel")
    n_jobs: int = Field(default=1, description="joblib workers for parameter sweeps")
    mirror_basis: int = Field(default=72, ge=16, description="Fourier-grid size for mirror-curve operators")
    linnik_targets: list[int] = Field(
        default_factory=lambda: [1_000, 500_000], description="Discriminant magnitudes of the Linnik ladder"
    )
    report_dir: str = Field(default=REPORT_DIR, description="Directory for JSON/CSV reports")


def get_settings(**overrides: Any) -> LabSettings:
    """Settings from the environment, with explicit overrides applied on top."""
    try:
        return LabSettings(**{k: v for k, v in overrides.items() if v is not None})
    except ValidationError as e:
        raise ConfigError(str(e)) from e


def load_config_file(path: Optional[str], allowed: set[str]) -> dict[str, Any]:
    """
    Read a JSON config file whose keys are CLI flag names (dashes or underscores).

    Unknown keys are rejected so a typo never silently falls back to a default.
    """
    if not path:
        return {}
    file = Path(path)
    if not file.is_file():
        raise ConfigError(f"config file '{path}' does not exist")
    try:
        data = orjson.loads(file.read_bytes())
    except orjson.JSONDecodeError as e:
        raise ConfigError(f"config file '{path}' is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config file '{path}' must hold a JSON object")
    normalized = {str(k).replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(normalized) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return normalized
