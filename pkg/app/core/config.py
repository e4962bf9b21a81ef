import os

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Configuration class for environment variables and laboratory settings.
    """
    # Service settings
    service_name: str = os.getenv("SERVICE_NAME", "subheat-lab")
    environment: str = os.getenv("ENVIRONMENT", "development")

    # Logging settings
    log_level: str = os.getenv("LOG_LEVEL", "INFO")
    json_logs: bool = os.getenv("JSON_LOGS", "False").lower() == "true"

    # Execution settings
    threads: int = Field(default=0, validation_alias="SUBHEAT_THREADS")
    dense_node_budget: int = Field(default=12_000, validation_alias="SUBHEAT_DENSE_BUDGET")

    # Numerical defaults
    quadrature_abs_tol: float = Field(default=1e-10, validation_alias="SUBHEAT_QUAD_TOL")
    default_seed: int = Field(default=20240101, validation_alias="SUBHEAT_SEED")
    default_t_grid_count: int = 24
    stability_tolerance: float = 0.25
    r2_gate: float = 0.9

    @field_validator("threads")
    @classmethod
    def _threads_nonnegative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("SUBHEAT_THREADS must be >= 0 (0 = auto)")
        return value

    @field_validator("dense_node_budget")
    @classmethod
    def _budget_positive(cls, value: int) -> int:
        if value <= 0:
            raise ValueError("SUBHEAT_DENSE_BUDGET must be positive")
        return value

    @property
    def worker_count(self) -> int:
        """Thread pool size; 0 resolves to the CPU count."""
        if self.threads == 0:
            return os.cpu_count() or 1
        return self.threads

    @property
    def logging_config(self) -> dict:
        """
        Returns logging configuration based on environment.
        """
        base_config = {
            "app_name": self.service_name,
            "log_level": self.log_level,
            "json_logs": self.json_logs,
        }
        if self.environment == "development":
            base_config.update({"json_logs": False})
        return base_config

    model_config = SettingsConfigDict(env_file=".env", extra="ignore", populate_by_name=True)


settings = Settings()

