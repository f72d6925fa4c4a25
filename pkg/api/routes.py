"""
api/routes.py — HTTP endpoints
===============================
    GET  /health           liveness probe
    GET  /config/defaults  default PipelineConfig
    POST /analyze          raw WAV body → tempo estimate

`/analyze` takes the WAV file as the raw request body
(``Content-Type: audio/wav``), so no multipart parsing is involved:

    curl --data-binary @track.wav -H 'Content-Type: audio/wav' \\
         'http://localhost:8000/analyze?q=10&epsilon=0.001'

Errors propagate to the handlers in `api.app`, so status codes mirror the
CLI exit codes: 200 success, 400 bad input or configuration, 422
isolation failure.
"""

from typing import Optional

from fastapi import APIRouter, HTTPException, Query, Request
from fastapi.concurrency import run_in_threadpool

from api.schemas import (
    AnalyzeResponse,
    ErrorResponse,
    HealthResponse,
    IsolationFailureResponse,
)
from config import API_VERSION
from ingest.audio import load_mono_bytes
from pipeline.runner import PipelineConfig, TempoPipeline
from utils.logger import get_logger

logger = get_logger("api.routes")

router = APIRouter()


@router.get("/health", response_model=HealthResponse)
async def health() -> HealthResponse:
    return HealthResponse(status="ok", version=API_VERSION)


@router.get("/config/defaults", response_model=PipelineConfig)
async def config_defaults() -> PipelineConfig:
    return PipelineConfig()


@router.post(
    "/analyze",
    response_model=AnalyzeResponse,
    responses={400: {"model": ErrorResponse}, 422: {"model": IsolationFailureResponse}},
)
async def analyze(
    request: Request,
    d: Optional[int] = Query(None, description="Downsampling factor D (even)"),
    k: Optional[int] = Query(None, description="Subband size K (default: derived)"),
    q: Optional[int] = Query(None, description="Subband count Q"),
    np: Optional[int] = Query(None, description="Peak separation n_p"),
    thresholds: Optional[int] = Query(None, description="Threshold steps H"),
    epsilon: Optional[float] = Query(None, description="Isolation accuracy ε"),
    min_runs: Optional[int] = Query(None, description="Runs needed for a nonzero score"),
    offset: Optional[float] = Query(None, description="Excerpt start (s)"),
    window: Optional[float] = Query(None, description="Excerpt length (s)"),
):
    """
    Estimate the tempo of the WAV file sent as the request body.
    """
    payload = await request.body()
    if not payload:
        raise HTTPException(status_code=400, detail="Request body must contain a WAV file.")

    config = PipelineConfig.create(
        downsample_factor=d,
        subband_size=k,
        subband_count=q,
        peak_separation=np,
        threshold_steps=thresholds,
        epsilon=epsilon,
        min_runs=min_runs,
        offset_seconds=offset,
        window_seconds=window,
    )
    buf = load_mono_bytes(payload)
    logger.debug("Analysing %d samples at %d Hz", len(buf), buf.sample_rate)
    # S-transform work is CPU-bound; keep it off the event loop
    estimate = await run_in_threadpool(TempoPipeline(config).analyze, buf)

    return AnalyzeResponse(**estimate.to_dict())
