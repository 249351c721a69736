"""
Configuration for the secure regression protocol
Loads from environment variables (prefix SECURE_LOGREG_) with sensible defaults
"""
from functools import lru_cache
from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict

# Mersenne prime 2^127 - 1: headroom for 100-institution sums of 2^40-scaled values
DEFAULT_MODULUS = (1 << 127) - 1


class Settings(BaseSettings):
    """Configuration loaded from environment variables"""

    model_config = SettingsConfigDict(
        env_prefix="SECURE_LOGREG_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Regression
    lam: float = 1.0
    tol: float = 1e-10
    max_iter: int = 50
    penalize_intercept: bool = True

    # Secret sharing
    threshold: int = 2
    centers: int = 3
    modulus: int = DEFAULT_MODULUS
    scale_exponent: int = 40
    share_policy: Literal["gradient_only", "all_summaries"] = "gradient_only"

    # Simulation
    rng_seed: int = 0
    workers: int = 1

    # Reporting
    parity_threshold: float = 1e-6
    log_level: str = "INFO"


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
