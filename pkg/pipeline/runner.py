"""
pipeline/runner.py — End-to-end audio → tempo pipeline
=======================================================
Orchestrates the full chain:

    WAV  →  excerpt window  →  2QK grid fit  →  downsample by D
         →  DFT  →  |S-transform|  →  Q subband envelopes
         →  per-band regularity scores  →  band isolation  →  BPM

`TempoPipeline.run()` stops after scoring and returns every
intermediate product (for dumps and diagnostics); `estimate()` applies
the isolation rule, which may raise `IsolationFailure`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from config import (
    DOWNSAMPLE_FACTOR,
    ISOLATION_EPSILON,
    MIN_RUNS,
    PEAK_SEPARATION,
    SUBBAND_COUNT,
    SUBBAND_SIZE,
    THRESHOLD_STEPS,
)
from envelopes.bands import OnsetEnvelope, SubbandSet, onset_envelopes, split_bands
from ingest.audio import AudioBuffer, select_window
from ingest.grid import GridConfig, derive_subband_size, downsample, fit_to_grid
from isolation.selector import (
    BandResult,
    IsolationParams,
    TempoEstimate,
    isolate,
    score_envelopes,
)
from tfr.stransform import STMagnitude, dft, stransform
from utils.errors import ConfigurationError
from utils.logger import get_logger

logger = get_logger("pipeline.runner")


class PipelineConfig(BaseModel):
    """
    Every knob of the pipeline.  Defaults are the reference setup
    (D=40, Q=10, n_p=40, H=100, ε=1e-3) with K derived from the excerpt.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    downsample_factor: int = Field(DOWNSAMPLE_FACTOR, description="D, positive even integer")
    subband_size: Optional[int] = Field(SUBBAND_SIZE, ge=1, description="K; None derives K = M/(2Q)")
    subband_count: int = Field(SUBBAND_COUNT, ge=1, description="Q")
    peak_separation: int = Field(PEAK_SEPARATION, ge=1, description="n_p (samples)")
    threshold_steps: int = Field(THRESHOLD_STEPS, ge=2, description="H")
    epsilon: float = Field(ISOLATION_EPSILON, gt=0.0, lt=1.0, description="ε")
    min_runs: int = Field(MIN_RUNS, ge=2)
    offset_seconds: float = Field(0.0, ge=0.0)
    window_seconds: Optional[float] = Field(None, gt=0.0)

    @field_validator("downsample_factor")
    @classmethod
    def _even_factor(cls, v: int) -> int:
        if v < 2 or v % 2 != 0:
            raise ValueError(f"D must be an even integer ≥ 2, got {v}")
        return v

    @classmethod
    def create(cls, **kwargs) -> "PipelineConfig":
        """Build a config, turning pydantic validation errors into ConfigurationError."""
        # CLI / query parameters arrive as None when not supplied
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        try:
            return cls(**kwargs)
        except ValidationError as exc:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
            )
            raise ConfigurationError(f"Invalid pipeline configuration: {problems}") from exc

    def isolation_params(self) -> IsolationParams:
        return IsolationParams(
            peak_separation=self.peak_separation,
            threshold_steps=self.threshold_steps,
            epsilon=self.epsilon,
            min_runs=self.min_runs,
        )


@dataclass
class PipelineRun:
    """Intermediate products of one analysis."""
    grid: GridConfig
    signal: AudioBuffer                 # downsampled, M = 2QK samples
    st: STMagnitude
    subbands: SubbandSet
    envelopes: list[OnsetEnvelope]
    band_results: list[BandResult] = field(default_factory=list)

    @property
    def effective_rate(self) -> float:
        return self.signal.sample_rate

    @property
    def scores(self) -> list[float]:
        return [r.b for r in self.band_results]


class TempoPipeline:
    """
    Stateless analysis chain configured once and reused across files.

    Parameters
    ----------
    config : PipelineConfig
    """

    def __init__(self, config: PipelineConfig | None = None):
        self.config = config or PipelineConfig()
        self._params = self.config.isolation_params()

    # ── Stages ───────────────────────────────────────────────────────────────

    def grid_for(self, buf: AudioBuffer) -> GridConfig:
        """GridConfig for `buf`, deriving K when the config leaves it open."""
        cfg = self.config
        k = cfg.subband_size
        if k is None:
            k = derive_subband_size(len(buf), cfg.downsample_factor, cfg.subband_count)
        return GridConfig(
            downsample_factor=cfg.downsample_factor,
            subband_size=k,
            subband_count=cfg.subband_count,
        )

    def envelopes(self, buf: AudioBuffer) -> PipelineRun:
        """Window, fit, downsample, transform and band-average `buf`."""
        cfg = self.config
        excerpt = select_window(buf, cfg.offset_seconds, cfg.window_seconds)
        grid = self.grid_for(excerpt)
        fitted = fit_to_grid(excerpt, grid)
        y = downsample(fitted, grid.downsample_factor)
        if len(y) != grid.grid_length:
            raise ConfigurationError(
                f"Grid fit produced M={len(y)}, expected 2QK={grid.grid_length}."
            )

        logger.info(
            "Excerpt %.2f s → M=%d at %.2f Hz (D=%d, K=%d, Q=%d).",
            fitted.duration, len(y), y.sample_rate,
            grid.downsample_factor, grid.subband_size, grid.subband_count,
        )

        spectrum = dft(y.samples)
        st = stransform(spectrum, float(np.mean(y.samples)), effective_rate=y.sample_rate)
        subbands = split_bands(st, grid.subband_size)
        return PipelineRun(
            grid=grid,
            signal=y,
            st=st,
            subbands=subbands,
            envelopes=onset_envelopes(subbands),
        )

    def run(self, buf: AudioBuffer) -> PipelineRun:
        """Envelopes plus per-band scores; never raises IsolationFailure."""
        run = self.envelopes(buf)
        run.band_results = score_envelopes(run.envelopes, self._params)
        return run

    def estimate(self, run: PipelineRun) -> TempoEstimate:
        """Apply the isolation rule to a scored run."""
        if not run.band_results:
            run.band_results = score_envelopes(run.envelopes, self._params)
        return isolate(run.envelopes, self._params, results=run.band_results)

    # ── Convenience ──────────────────────────────────────────────────────────

    def analyze(self, buf: AudioBuffer) -> TempoEstimate:
        return self.estimate(self.run(buf))
