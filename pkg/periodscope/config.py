"""Application configuration using pydantic-settings."""

from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Numerical defaults and runtime settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="PERIODSCOPE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    # Application
    app_name: str = "periodscope"
    app_version: str = "0.1.0"
    debug: bool = False
    environment: str = "production"  # development, test, production

    # System construction
    domain_lo: float = -10.0
    domain_hi: float = 10.0
    tol_quadrature: float = 1e-10
    panel_width: float = 0.25
    scan_points: int = 2000
    energy_margin: float = 1e-9

    # Jets and origin expansions
    jet_order: int = 4
    series_order: int = 12
    origin_epsilon: float = 1e-4
    series_radius: float = 1e-2

    # Period quadratures
    gl_order: int = 64
    quad_abs_tol: float = 1e-10
    quad_rel_tol: float = 1e-9
    max_panel_depth: int = 12
    inversion_tol: float = 1e-13

    # ODE oracle
    ode_rtol: float = 1e-12
    ode_atol: float = 1e-12

    # Criteria
    tol_iso: float = 1e-9
    tol_constancy: float = 1e-8
    samples: int = 64

    # CLI
    workers: int = 4
    output_format: str = "csv"


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
