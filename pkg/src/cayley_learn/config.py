"""
Configuration management using pydantic-settings.

This module loads and validates all configuration from environment variables
(prefix ``CAYLEY_LEARN_``) and an optional ``.env`` file.
"""

from pathlib import Path
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Application settings loaded from environment variables.

    Attributes:
        output_root: Default root directory for run bundles, datasets and logs
        log_level: Console logging level
        subgroup_order_bound: Largest group order accepted by the subgroup enumerator
        ring_size_bound: Largest ring size accepted by cyclic_product_ring
        alternating_max_degree: Largest m accepted by alternating_group
        symmetric_max_degree: Largest m accepted by symmetric_group
        latin_burn_in_power: Burn-in of the Latin square chain is n**p proper moves
        latin_thinning_power: Thinning between samples is n**p proper moves
        max_workers: Worker threads used by learning curves
        oracle_sample_rate: Fraction of records re-checked by the exact oracles
        feature_cache_bytes: Budget for caching a dense feature matrix
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="CAYLEY_LEARN_",
        case_sensitive=False,
        extra="ignore",
    )

    # Paths
    output_root: Path = Field(default=Path("runs"), description="Default output root for run bundles")

    # Exact algebra limits
    subgroup_order_bound: int = Field(default=72, ge=1, description="Max group order for subgroup enumeration")
    ring_size_bound: int = Field(default=256, ge=1, description="Max ring size for cyclic_product_ring")
    alternating_max_degree: int = Field(default=6, ge=1, le=7, description="Max degree m for A_m")
    symmetric_max_degree: int = Field(default=5, ge=1, le=6, description="Max degree m for S_m")

    # Latin square chain
    latin_burn_in_power: int = Field(default=3, ge=1, description="Burn-in is n**p proper moves")
    latin_thinning_power: int = Field(default=2, ge=0, description="Thinning is n**p proper moves")

    # Execution
    max_workers: int = Field(default=4, ge=1, description="Concurrent trials in learning curves")
    oracle_sample_rate: float = Field(
        default=0.01, ge=0.0, le=1.0, description="Fraction of emitted records re-checked by oracles"
    )
    feature_cache_bytes: int = Field(
        default=256 * 1024 * 1024, ge=0, description="Dense feature matrices above this size are encoded lazily"
    )

    # Logging
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        default="INFO", description="Logging level"
    )

    @field_validator("output_root")
    @classmethod
    def validate_output_root(cls, v: Path) -> Path:
        """Bundles and logs are written under an absolute root."""
        return v.resolve()


# Built on first use; reload_settings() picks up a changed environment
_settings: Settings | None = None


def get_settings() -> Settings:
    """Shared Settings, created on first call."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reload_settings() -> Settings:
    """Rebuild the shared Settings from the current environment and .env file."""
    global _settings
    _settings = Settings()
    return _settings
