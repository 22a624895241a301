"""Configuration management using pydantic-settings."""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class LabConfig(BaseSettings):
    """Runtime settings for the regret simulation lab."""

    model_config = SettingsConfigDict(
        env_prefix="MBR_REGRET_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    # Size limits
    wd_size_limit: int = Field(2000, ge=1)
    cost_size_limit: int = Field(500, ge=1)
    bruteforce_support_limit: int = Field(6, ge=1)

    # Transport solver
    transport_pivot_tol: float = 1e-12
    transport_max_iter: int = 0  # 0 = automatic, 50 * (m + n) + 1000
    support_trim: float = 1e-15

    # Distributions
    distribution_tol: float = 1e-12

    # Simulation defaults
    workers: int = Field(1, ge=1)
    default_seeds: int = Field(100, ge=1)
    default_master_seed: int = 0
    default_space_size: int = Field(1000, ge=1)
    appendix_beta: float = Field(0.2, ge=0.0)

    # Output
    csv_precision: int = Field(17, ge=12)
    table_precision: int = Field(12, ge=12)

    # Logging
    log_level: str = "INFO"
    log_json: bool = False


# Global config instance
config = LabConfig()
