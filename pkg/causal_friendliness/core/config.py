import os
from dataclasses import dataclass

from dotenv import load_dotenv

load_dotenv()


def _env_bool(name: str, default: str = "false") -> bool:
    return os.getenv(name, default).strip().lower() in {"1", "true", "yes", "on"}


@dataclass(frozen=True)
class Settings:
    # absolute tolerance for assumption predicates and LP membership
    tolerance: float = float(os.getenv("CF_TOLERANCE", "1e-9"))

    # campaigns
    seed: int = int(os.getenv("CF_SEED", "0"))
    samples: int = int(os.getenv("CF_SAMPLES", "500"))
    workers: int = int(os.getenv("CF_WORKERS", "1"))

    # Tsirelson sweep
    grid: int = int(os.getenv("CF_GRID", "64"))
    refine: int = int(os.getenv("CF_REFINE", "200"))

    log_level: str = os.getenv("CF_LOG_LEVEL", "INFO")
    log_json: bool = _env_bool("CF_LOG_JSON")


settings = Settings()
