"""Application settings using Pydantic Settings."""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime configuration loaded from environment variables (prefix ``LCP_``)."""

    model_config = SettingsConfigDict(
        env_prefix="LCP_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Logging
    log_level: str = "INFO"

    # Artifacts
    output_dir: str = "./results"
    csv_schema_version: int = 1

    # Sweep worker pool
    sweep_workers: int = 4


# Global settings instance
settings = Settings()
