"""
api/schemas.py — Pydantic response models
==========================================
Centralises the data-transfer objects so that FastAPI can auto-generate
OpenAPI docs.  Request configuration travels as query parameters and is
validated by `pipeline.runner.PipelineConfig`.
"""

from pydantic import BaseModel


class HealthResponse(BaseModel):
    status: str
    version: str


class AnalyzeResponse(BaseModel):
    """Tempo estimate for one uploaded WAV."""
    bpm: float
    band_index: int
    score_b: float
    isolation_set: list[int]
    effective_rate_hz: float
    gaps: list[float]


class IsolationFailureResponse(BaseModel):
    error: str = "isolation_failure"
    scores: list[float]
    degenerate_bands: list[int]
    epsilon: float


class ErrorResponse(BaseModel):
    error: str
    detail: str
