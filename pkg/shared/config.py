"""
Shared configuration management for KloosterLab.

This module loads and validates all environment variables using Pydantic Settings.
Every variable is read with the ``KLOOSTERLAB_`` prefix, e.g. ``KLOOSTERLAB_CACHE``.
"""

from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field, field_validator
from pathlib import Path
from typing import Optional


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="KLOOSTERLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    # Table cache
    cache: Optional[Path] = Field(
        default=None,
        description="Directory for the binary Kloosterman table cache (disabled when unset)"
    )
    memory_cache_size: int = Field(
        default=32,
        description="Number of tables kept in the in-process LRU cache",
        ge=1,
        le=4096
    )

    # Cost guards
    naive_table_max_p: int = Field(
        default=100_000,
        description="Largest modulus for which an O(p^2) naive table is built",
        ge=5
    )
    dft_table_max_p: int = Field(
        default=10_000_000,
        description="Largest modulus for which an O(p log p) DFT table is built",
        ge=5
    )
    naive_pointwise_max_p: int = Field(
        default=10_000_000,
        description="Largest modulus for a single O(p) naive evaluation",
        ge=5
    )
    multi_sum_max_p: int = Field(
        default=1_000_000,
        description="Largest modulus for brute-force multi-linear sums",
        ge=5
    )
    gm_max_cost: int = Field(
        default=100_000_000,
        description="Largest p*h accepted by the moment sums over sliding windows",
        ge=1
    )
    horizontal_max_x: int = Field(
        default=100_000,
        description="Largest x for scans over primes in (x, 2x]",
        ge=3
    )

    # Numerical tolerances
    tol_zero: float = Field(
        default=1e-9,
        description="Relative size (in units of sqrt(p)) below which a sum counts as zero",
        gt=0.0,
        lt=1e-3
    )
    tol_ratio: float = Field(
        default=1e-6,
        description="Relative slack granted to every bound ratio",
        ge=0.0,
        lt=1e-2
    )
    tol_weil: float = Field(
        default=1e-6,
        description="Absolute slack on the Weil bound for built tables",
        ge=0.0
    )

    # Experiment defaults
    chebyshev_truncation: int = Field(
        default=64,
        description="Default truncation degree L for indicator expansions",
        ge=0,
        le=10_000
    )
    cdf_grid_points: int = Field(
        default=4096,
        description="Grid size for the Sato-Tate CDF discrepancy",
        ge=2
    )
    exhaustive_max_p: int = Field(
        default=2003,
        description="Largest modulus for which maxima over twists are exhaustive",
        ge=5
    )
    sampled_twists: int = Field(
        default=256,
        description="Number of random twists h sampled above exhaustive_max_p",
        ge=1
    )
    wk_sampled_residues: int = Field(
        default=64,
        description="Number of random residues a sampled for W_k above exhaustive_max_p",
        ge=1
    )
    omega_r_max: int = Field(
        default=8,
        description="Largest r scanned when minimising omega_r(p, N)",
        ge=1,
        le=64
    )

    # Execution
    workers: int = Field(default=1, description="Worker threads for sweeps and naive tables", ge=1, le=256)
    seed: int = Field(default=20240101, description="Default seed for sampled sweeps", ge=0)

    # Logging
    log_level: str = Field(
        default="INFO",
        description="Logging level"
    )


    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        """Validate log level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"log_level must be one of {valid_levels}")
        return v.upper()

    @field_validator("cache", mode="before")
    @classmethod
    def validate_cache(cls, v):
        """Expand ``~`` in the cache directory."""
        if v is None or str(v).strip() == "":
            return None
        return Path(v).expanduser()



# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """
    Get the global settings instance.

    Returns:
        Settings: Application settings
    """
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reload_settings() -> Settings:
    """
    Reload settings from environment.

    Returns:
        Settings: Reloaded application settings
    """
    global _settings
    _settings = Settings()
    return _settings


# Convenience function for direct import
settings = get_settings()
