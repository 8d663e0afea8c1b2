"""Configuration module with Pydantic BaseSettings."""

import math
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=False,
        populate_by_name=True,
        extra="ignore",
    )

    # Application Configuration
    env: str = Field("dev", alias="ENV")  # dev or prod
    log_level: str = Field("INFO", alias="LOG_LEVEL")

    # Linear Algebra
    eigensolver: Literal["lapack", "jacobi"] = Field("lapack", alias="EIGENSOLVER")
    jacobi_tolerance: float = Field(1e-12, alias="JACOBI_TOLERANCE")
    jacobi_max_sweeps: int = Field(100, alias="JACOBI_MAX_SWEEPS")
    hermitian_tolerance: float = Field(1e-10, alias="HERMITIAN_TOLERANCE")
    spectrum_floor: float = Field(1e-12, alias="SPECTRUM_FLOOR")

    # Scenario Defaults
    default_omega: float = Field(2 * math.pi, alias="DEFAULT_OMEGA")
    default_points: int = Field(1001, alias="DEFAULT_POINTS")

    # Witnesses & Events
    backflow_threshold: float = Field(1e-9, alias="BACKFLOW_THRESHOLD")
    event_threshold: float = Field(1e-6, alias="EVENT_THRESHOLD")
    mutual_information_method: Literal["full", "closed_form"] = Field(
        "full", alias="MUTUAL_INFORMATION_METHOD"
    )

    # Execution
    sweep_workers: int = Field(1, alias="SWEEP_WORKERS")

    # Self-test / property sampling
    random_seed: int = Field(20130, alias="RANDOM_SEED")
    selftest_samples: int = Field(1000, alias="SELFTEST_SAMPLES")


# Global settings instance
settings = Settings()
