"""
RPB Configuration Management

Centralized configuration using Pydantic settings with environment variable support.
Numerical defaults follow the published experimental protocol (delta=0.025,
delta'=0.01, c1=c2=5, p_min=1e-5, sigma0=0.03, SGD 0.005/0.95, batch 250, 200 epochs).
"""

from pydantic_settings import BaseSettings
from pydantic import Field


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Application
    DEBUG: bool = Field(default=False)
    LOG_LEVEL: str = Field(default="INFO")
    LOG_FORMAT: str = Field(default="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    OUTPUT_DIR: str = Field(default="./results/")

    # Numerics
    KL_INV_TOL: float = Field(default=1e-12)
    KL_INV_MAX_ITER: int = Field(default=200)
    SUPPORT_TOL: float = Field(default=1e-12)

    # Confidence budget
    DEFAULT_DELTA: float = Field(default=0.025)
    DEFAULT_DELTA_PRIME: float = Field(default=0.01)
    DEFAULT_GAMMA: float = Field(default=0.5)

    # Hypothesis space
    SIGMA0: float = Field(default=0.03)
    C1: float = Field(default=5.0)
    C2: float = Field(default=5.0)
    P_MIN: float = Field(default=1e-5)

    # Training
    LEARNING_RATE: float = Field(default=0.005)
    MOMENTUM: float = Field(default=0.95)
    BATCH_SIZE: int = Field(default=250)
    EPOCHS: int = Field(default=200)

    # Simulation
    COVERAGE_TRIALS: int = Field(default=10000)
    MAX_WORKERS: int = Field(default=1)

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = True


# Global settings instance
settings = Settings()
