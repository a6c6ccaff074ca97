import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Load environment variables from .env file
load_dotenv()


class Settings(BaseModel):
    database_url: str = "sqlite:///./data/motif_sketch.db"
    log_level: str = "INFO"
    default_roots: int = Field(4, ge=2)
    max_matrix_dim: int = Field(64, ge=2)
    oracle_max_vertices: int = Field(10_000, ge=1)
    batch_size: int = Field(4096, ge=1)


@lru_cache
def get_settings() -> Settings:
    """Read settings from the environment once per process."""
    env = {
        "database_url": os.getenv("SKETCH_DATABASE_URL"),
        "log_level": os.getenv("SKETCH_LOG_LEVEL"),
        "default_roots": os.getenv("SKETCH_DEFAULT_ROOTS"),
        "max_matrix_dim": os.getenv("SKETCH_MAX_MATRIX_DIM"),
        "oracle_max_vertices": os.getenv("SKETCH_ORACLE_MAX_VERTICES"),
        "batch_size": os.getenv("SKETCH_BATCH_SIZE"),
    }
    return Settings(**{key: value for key, value in env.items() if value is not None})
