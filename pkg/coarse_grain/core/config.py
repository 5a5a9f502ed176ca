"""
Configuration module for quantum-coarse-grain.

Provides centralized configuration management with environment variable support,
profile presets, and defaults sized for desk-scale reproduction runs.
"""

import json
import os
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, Optional


class Profile(Enum):
    """Configuration presets for different run sizes."""

    DESK = "desk"
    PAPER = "paper"
    DEBUG = "debug"


def _parse_bool(value: str) -> bool:
    return value.lower() in ("true", "1", "yes")


@dataclass
class CoarseGrainConfig:
    """
    Centralized configuration for quantum-coarse-grain.

    Configuration is loaded in this priority order:
    1. Code defaults (defined here)
    2. Profile preset (CG_PROFILE)
    3. Environment variables (CG_* prefixed, a .env file is honoured by the CLI)
    """

    # Numerical tolerances
    rank_tol: float = 1e-12
    """Relative eigenvalue threshold for support-restricted inverses."""

    commutation_tol: float = 1e-8
    """Residual below which a diagram is reported as commuting."""

    # Solver
    feas_tol: float = 1e-8
    """Relative primal and dual infeasibility accepted as Optimal."""

    gap_tol: float = 1e-8
    """Relative duality gap accepted as Optimal."""

    max_iter: int = 200
    """Interior-point iteration cap."""

    infeasibility_margin: float = 1e-8
    """Normalized margin for accepting a dual improving ray as a certificate."""

    presolve_tol: float = 1e-10
    """Rank tolerance for removing dependent equality rows."""

    bisection_tol: float = 1e-3
    """Interval width at which the gamma-threshold bisection stops."""

    # Harness
    samples: int = 10_000
    """Random states per benchmark run."""

    seed: int = 2024
    """Base seed for all sampling."""

    workers: int = 4
    """Worker threads for per-state evaluation."""

    batch_size: int = 256
    """States per work item handed to a worker."""

    coupling: float = 1.0
    """Interaction frequency J in s^-1."""

    # Output
    output_format: str = "csv"
    """Record format: csv or json."""

    compression_enabled: bool = False
    """Gzip JSON outputs."""

    compression_level: int = 6
    """Gzip compression level (1-9)."""

    # Logging Configuration
    log_level: str = "INFO"
    """Logging level (DEBUG, INFO, WARNING, ERROR)."""

    log_path: Optional[str] = None
    """Path to log file. If None, logs to stderr."""

    def __post_init__(self):
        """Post-initialization to validate and normalize config."""
        self._validate()
        self._apply_profile()
        self._load_from_env()
        self._validate()

    def _validate(self):
        """Validate configuration values."""
        for name in (
            "rank_tol",
            "commutation_tol",
            "feas_tol",
            "gap_tol",
            "infeasibility_margin",
            "presolve_tol",
            "bisection_tol",
        ):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {value}")

        if self.max_iter <= 0:
            raise ValueError(f"max_iter must be positive, got {self.max_iter}")

        if self.samples < 1:
            raise ValueError(f"samples must be at least 1, got {self.samples}")

        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")

        if self.batch_size <= 0:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")

        if self.coupling <= 0.0:
            raise ValueError(f"coupling must be positive, got {self.coupling}")

        if self.output_format not in ("csv", "json"):
            raise ValueError(f"output_format must be csv or json, got {self.output_format}")

        if not 1 <= self.compression_level <= 9:
            raise ValueError(
                f"compression_level must be between 1 and 9, got {self.compression_level}"
            )

        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR"]
        if self.log_level not in valid_levels:
            raise ValueError(f"log_level must be one of {valid_levels}, got {self.log_level}")

    def _apply_profile(self):
        """Apply profile preset if specified via environment."""
        profile_str = os.getenv("CG_PROFILE")
        if profile_str:
            try:
                profile = Profile(profile_str.lower())
            except ValueError:
                raise ValueError(f"Invalid CG_PROFILE: {profile_str}")
            self._apply_preset(profile)

    def _apply_preset(self, profile: Profile):
        """Apply preset configuration for the given profile."""
        if profile == Profile.DESK:
            self.samples = 10_000
            self.max_iter = 200
            self.bisection_tol = 1e-3
            self.workers = 4
            self.log_level = "INFO"

        elif profile == Profile.PAPER:
            # Full-scale histograms; slow
            self.samples = 1_000_000
            self.max_iter = 400
            self.bisection_tol = 2e-4
            self.workers = max(4, os.cpu_count() or 1)
            self.batch_size = 2048
            self.compression_enabled = True
            self.log_level = "WARNING"

        elif profile == Profile.DEBUG:
            self.samples = 200
            self.workers = 1
            self.batch_size = 50
            self.compression_enabled = False
            self.log_level = "DEBUG"

    def _load_from_env(self):
        """Load configuration from environment variables."""
        env_mapping = {
            "CG_RANK_TOL": ("rank_tol", float),
            "CG_COMMUTATION_TOL": ("commutation_tol", float),
            "CG_FEAS_TOL": ("feas_tol", float),
            "CG_GAP_TOL": ("gap_tol", float),
            "CG_MAX_ITER": ("max_iter", int),
            "CG_INFEASIBILITY_MARGIN": ("infeasibility_margin", float),
            "CG_PRESOLVE_TOL": ("presolve_tol", float),
            "CG_BISECTION_TOL": ("bisection_tol", float),
            "CG_SAMPLES": ("samples", int),
            "CG_SEED": ("seed", int),
            "CG_WORKERS": ("workers", int),
            "CG_BATCH_SIZE": ("batch_size", int),
            "CG_COUPLING": ("coupling", float),
            "CG_OUTPUT_FORMAT": ("output_format", str.lower),
            "CG_COMPRESSION_ENABLED": ("compression_enabled", _parse_bool),
            "CG_COMPRESSION_LEVEL": ("compression_level", int),
            "CG_LOG_LEVEL": ("log_level", str.upper),
            "CG_LOG_PATH": ("log_path", str),
        }

        for env_var, (attr_name, parser) in env_mapping.items():
            value = os.getenv(env_var)
            if value is not None:
                try:
                    parsed_value = parser(value)
                    setattr(self, attr_name, parsed_value)
                except (ValueError, AttributeError) as e:
                    raise ValueError(f"Invalid {env_var}: {value} - {e}")

    def solver_options(self, tol: Optional[float] = None) -> Dict[str, Any]:
        """
        Keyword arguments for sdp.solve built from this configuration.

        A tol overrides both feas_tol and gap_tol.
        """
        return {
            "feas_tol": self.feas_tol if tol is None else tol,
            "gap_tol": self.gap_tol if tol is None else tol,
            "max_iter": self.max_iter,
            "presolve_tol": self.presolve_tol,
            "infeasibility_margin": self.infeasibility_margin,
        }

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return asdict(self)

    def to_json(self) -> str:
        """Convert configuration to JSON string."""
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> "CoarseGrainConfig":
        """Create CoarseGrainConfig from dictionary."""
        return cls(**config_dict)

    @classmethod
    def from_json(cls, json_str: str) -> "CoarseGrainConfig":
        """Create CoarseGrainConfig from JSON string."""
        return cls.from_dict(json.loads(json_str))

    @classmethod
    def desk(cls) -> "CoarseGrainConfig":
        """Get desk-scale preset configuration."""
        config = cls()
        config._apply_preset(Profile.DESK)
        return config

    @classmethod
    def paper(cls) -> "CoarseGrainConfig":
        """Get full-scale preset configuration."""
        config = cls()
        config._apply_preset(Profile.PAPER)
        return config

    @classmethod
    def debug(cls) -> "CoarseGrainConfig":
        """Get debug preset configuration."""
        config = cls()
        config._apply_preset(Profile.DEBUG)
        return config

    @classmethod
    def for_profile(cls, profile: Profile) -> "CoarseGrainConfig":
        """Get the preset configuration for a Profile value."""
        if profile == Profile.PAPER:
            return cls.paper()
        if profile == Profile.DEBUG:
            return cls.debug()
        return cls.desk()


# Global configuration instance (can be overridden)
_global_config: Optional[CoarseGrainConfig] = None


def get_config() -> CoarseGrainConfig:
    """
    Get the global configuration instance.

    Creates a default configuration if none has been set.

    Returns:
        CoarseGrainConfig: The global configuration instance.
    """
    global _global_config
    if _global_config is None:
        _global_config = CoarseGrainConfig()
    return _global_config


def set_config(config: CoarseGrainConfig):
    """
    Set the global configuration instance.

    Args:
        config: The CoarseGrainConfig instance to use globally.
    """
    global _global_config
    _global_config = config
