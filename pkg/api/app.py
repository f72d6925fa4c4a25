"""
api/app.py — FastAPI application factory
==========================================
Builds the FastAPI instance and maps project exceptions to HTTP responses:

    IsolationFailure  → 422  IsolationFailureResponse
    other StbeatError → 400  ErrorResponse

CORS is open to every origin; restrict `allow_origins` when the service
is exposed beyond a local machine.
"""

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from api.routes import router
from api.schemas import ErrorResponse, IsolationFailureResponse
from config import API_TITLE, API_VERSION
from utils.errors import IsolationFailure, StbeatError
from utils.logger import get_logger

logger = get_logger("api.app")


async def _isolation_failure(request: Request, exc: IsolationFailure) -> JSONResponse:
    logger.info("No periodic band for %s: %s", request.url.path, exc)
    body = IsolationFailureResponse(**exc.to_dict())
    return JSONResponse(status_code=422, content=body.model_dump())


async def _bad_input(request: Request, exc: StbeatError) -> JSONResponse:
    logger.warning("Rejected %s request: %s", request.url.path, exc)
    body = ErrorResponse(error=type(exc).__name__, detail=str(exc))
    return JSONResponse(status_code=400, content=body.model_dump())


def create_app() -> FastAPI:
    """Construct a fresh application; tests build one per client."""
    app = FastAPI(
        title=API_TITLE,
        version=API_VERSION,
        description=(
            "Tempo (BPM) estimation from WAV audio via subband onset "
            "envelopes of the discrete S-transform."
        ),
    )
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )
    # Starlette resolves handlers along the MRO, so the subclass wins
    app.add_exception_handler(IsolationFailure, _isolation_failure)
    app.add_exception_handler(StbeatError, _bad_input)
    app.include_router(router)
    return app
