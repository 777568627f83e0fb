"""
BFMLIFT — Toric SYZ / BFM Lifting Toolkit
Application Configuration — Pydantic Settings
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from contextvars import ContextVar
from functools import lru_cache
from typing import Iterator, Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Tool defaults, overridable from the environment (BFMLIFT_*) or a .env file."""

    # --- Application ---
    app_name: str = "bfmlift"
    version: str = "1.0.0"
    log_level: str = Field(default="WARNING", alias="BFMLIFT_LOG_LEVEL")
    log_json: bool = Field(default=True, alias="BFMLIFT_LOG_JSON")

    # --- Exact algebra ---
    budget: int = Field(default=200_000, ge=1, alias="BFMLIFT_BUDGET")
    weyl_bound: int = Field(default=1_000_000, ge=1, alias="BFMLIFT_WEYL_BOUND")
    novikov_mode: Literal["unit", "formal"] = Field(default="unit", alias="BFMLIFT_NOVIKOV")
    q_value: float = Field(default=math.exp(-1.0), gt=0, alias="BFMLIFT_Q_VALUE")

    # --- Numerics (three-decade separation) ---
    solver_residual: float = Field(default=1e-9, gt=0, alias="BFMLIFT_SOLVER_RESIDUAL")
    identity_tol: float = Field(default=1e-8, gt=0, alias="BFMLIFT_IDENTITY_TOL")
    dedup_tol: float = Field(default=1e-7, gt=0, alias="BFMLIFT_DEDUP_TOL")
    witness_tol: float = Field(default=1e-6, gt=0, alias="BFMLIFT_WITNESS_TOL")
    hessian_tol: float = Field(default=1e-8, gt=0, alias="BFMLIFT_HESSIAN_TOL")
    newton_starts: int = Field(default=256, ge=1, alias="BFMLIFT_NEWTON_STARTS")
    newton_max_iter: int = Field(default=60, ge=1, alias="BFMLIFT_NEWTON_MAX_ITER")
    sample_starts: int = Field(default=32, ge=1, alias="BFMLIFT_SAMPLE_STARTS")
    mp_bits: int = Field(default=128, ge=53, alias="BFMLIFT_MP_BITS")

    # --- Reproducibility ---
    seed: int = Field(default=0, alias="BFMLIFT_SEED")

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": False,
        "extra": "ignore",
        "populate_by_name": True,
    }


_active: ContextVar[Optional[Settings]] = ContextVar("bfmlift_settings", default=None)


@lru_cache()
def _load_settings() -> Settings:
    return Settings()


def get_settings() -> Settings:
    """Settings of the running job, else the cached environment singleton."""
    return _active.get() or _load_settings()


get_settings.cache_clear = _load_settings.cache_clear  # type: ignore[attr-defined]


@contextmanager
def use_settings(settings: Settings) -> Iterator[Settings]:
    """Scope per-job overrides (CLI flags, job options) to one pipeline run."""
    token = _active.set(settings)
    try:
        yield settings
    finally:
        _active.reset(token)
