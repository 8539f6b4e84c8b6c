from pydantic_settings import BaseSettings, SettingsConfigDict

from dotenv import load_dotenv

load_dotenv()


class Settings(BaseSettings):
    APP_NAME: str = "swapchain"
    VERSION: str = "1.0.0"
    LOG_LEVEL: str = "INFO"

    # Default directory for reports written by the CLI
    SWAPCHAIN_OUTPUT_DIR: str = "./reports"
    DEFAULT_SEED: int = 2008

    # Numerical tolerances (max-norm)
    HERMITIAN_TOL: float = 1e-10
    PSD_TOL: float = 1e-10
    NORM_TOL: float = 1e-10
    TRACE_TOL: float = 1e-9
    PROBABILITY_FLOOR: float = 1e-12
    IMPOSSIBLE_OUTCOME_TOL: float = 1e-12

    # Maximum-likelihood tomography
    MLE_MAX_ITER: int = 10_000
    MLE_GTOL: float = 1e-8
    BOOTSTRAP_RESAMPLES: int = 200

    WORKERS: int = 1

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
