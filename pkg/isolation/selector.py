"""
isolation/selector.py — Beat-band isolation & BPM
==================================================
Scores every subband envelope and picks the one carrying the
beat-causing onsets.

    b_i = best regularity score of band i over the threshold sweep
    I*  = {i : |1 − b_i| ≤ ε}

An empty I* raises `IsolationFailure` (carrying every b_i).  Otherwise
the selected band is argmax_{i ∈ I*} b_i, ties going to the lowest band:
rhythm instruments sit at the low end of the spectrum.

BPM
---
The mean centroid gap ḡ of the selected band is measured in envelope
samples, so

    BPM = round(60 · f_eff / ḡ)

where f_eff is the envelope (post-downsampling) sample rate.

Per-band scoring is independent; bands are scored on a thread pool and
merged back in band order.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np

from config import ISOLATION_EPSILON, MIN_RUNS, PEAK_SEPARATION, THRESHOLD_STEPS, worker_count
from envelopes.bands import OnsetEnvelope
from isolation.clustering import BandScore, ClusterAnalysis, score_band
from isolation.precondition import precondition
from utils.errors import (
    ConfigurationError,
    DegenerateEnvelopeError,
    IsolationFailure,
    NoPeriodError,
)
from utils.logger import get_logger

logger = get_logger("isolation.selector")


@dataclass(frozen=True)
class IsolationParams:
    """
    Attributes
    ----------
    peak_separation : int    n_p, minimum distance between upper-envelope knots.
    threshold_steps : int    H, number of thresholds swept per band.
    epsilon         : float  ε, isolation accuracy.
    min_runs        : int    Runs needed for a nonzero regularity score.
    """
    peak_separation: int = PEAK_SEPARATION
    threshold_steps: int = THRESHOLD_STEPS
    epsilon: float = ISOLATION_EPSILON
    min_runs: int = MIN_RUNS

    def __post_init__(self):
        if self.peak_separation < 1:
            raise ConfigurationError(f"n_p must be ≥ 1, got {self.peak_separation}.")
        if self.threshold_steps < 2:
            raise ConfigurationError(f"H must be ≥ 2, got {self.threshold_steps}.")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigurationError(f"ε must lie in (0, 1), got {self.epsilon}.")
        if self.min_runs < 2:
            raise ConfigurationError(f"min_runs must be ≥ 2, got {self.min_runs}.")


@dataclass(frozen=True)
class BandResult:
    """Outcome of scoring one band; `score` is None for degenerate (all-zero) bands."""
    band_index: int
    score: BandScore | None

    @property
    def b(self) -> float:
        return self.score.b if self.score is not None else 0.0

    @property
    def degenerate(self) -> bool:
        return self.score is None

    def to_dict(self) -> dict:
        """Diagnostics record: b_i, best threshold j, its gaps and the v_j trace."""
        if self.score is None:
            return {
                "band": self.band_index,
                "score_b": 0.0,
                "degenerate": True,
                "best_threshold_index": None,
                "best_threshold": None,
                "gaps": [],
                "trace": [],
            }
        return {
            "band": self.band_index,
            "score_b": self.score.b,
            "degenerate": False,
            "best_threshold_index": self.score.best_threshold,
            "best_threshold": self.score.best.threshold,
            "n_runs": self.score.best.n_runs,
            "gaps": self.score.best.gaps.tolist(),
            "trace": self.score.trace.tolist(),
        }


@dataclass(frozen=True)
class TempoEstimate:
    """
    Attributes
    ----------
    selected_band  : int         i*, 1-based.
    score          : float       b_{i*}.
    best_gaps      : ndarray     Centroid gaps of i* at its best threshold (envelope samples).
    bpm            : float
    effective_rate : float       Envelope sample rate (Hz).
    isolation_set  : list[int]   I*.
    scores         : list[float] b_i of every band.
    """
    selected_band: int
    score: float
    best_gaps: np.ndarray
    bpm: float
    effective_rate: float
    isolation_set: list[int]
    scores: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "bpm": self.bpm,
            "band_index": self.selected_band,
            "score_b": self.score,
            "isolation_set": list(self.isolation_set),
            "effective_rate_hz": self.effective_rate,
            "gaps": np.asarray(self.best_gaps).tolist(),
        }


def score_envelope(envelope: OnsetEnvelope, params: IsolationParams) -> BandResult:
    """Precondition and score one band; degenerate bands score 0."""
    try:
        pre = precondition(envelope.values, params.peak_separation)
    except DegenerateEnvelopeError:
        logger.warning("Band %d envelope is all zero, scored 0.", envelope.band_index)
        return BandResult(band_index=envelope.band_index, score=None)
    score = score_band(pre.centered, params.threshold_steps, params.min_runs)
    return BandResult(band_index=envelope.band_index, score=score)


def score_envelopes(
    envelopes: Sequence[OnsetEnvelope],
    params: IsolationParams,
    workers: int | None = None,
) -> list[BandResult]:
    """Score every band; the result list follows the input order."""
    workers = workers or worker_count()
    if workers <= 1 or len(envelopes) <= 1:
        return [score_envelope(env, params) for env in envelopes]
    with ThreadPoolExecutor(max_workers=min(workers, len(envelopes))) as pool:
        return list(pool.map(lambda env: score_envelope(env, params), envelopes))


def isolation_set(scores: Sequence[float], epsilon: float) -> list[int]:
    """I* = {i : |1 − b_i| ≤ ε}, 1-based."""
    return [i + 1 for i, b in enumerate(scores) if abs(1.0 - b) <= epsilon]


def select_band(scores: Sequence[float], epsilon: float) -> tuple[list[int], int]:
    """
    Return (I*, i*), with i* = argmax over I* of b_i, lowest index on ties.

    Raises
    ------
    IsolationFailure
        If I* is empty.
    """
    members = isolation_set(scores, epsilon)
    if not members:
        raise IsolationFailure(scores=list(scores), degenerate_bands=[], epsilon=epsilon)
    best = max(members, key=lambda i: (scores[i - 1], -i))
    return members, best


def bpm_estimate(best: ClusterAnalysis, effective_rate: float) -> float:
    """
    Tempo from the mean centroid gap: round(60 · f_eff / ḡ).

    Raises
    ------
    NoPeriodError
        If the clustering has no gaps.
    """
    if effective_rate <= 0:
        raise ConfigurationError(f"Effective rate must be positive, got {effective_rate}.")
    gaps = np.asarray(best.gaps, dtype=np.float64)
    if gaps.size == 0:
        raise NoPeriodError("No centroid gaps, cannot derive a beat period.")
    mean_gap = float(gaps.mean())
    bpm = float(round(60.0 * effective_rate / mean_gap))
    if bpm <= 0:
        raise NoPeriodError(f"Mean gap {mean_gap:.1f} samples is too long for a tempo estimate.")
    return bpm


def isolate(
    envelopes: Sequence[OnsetEnvelope],
    params: IsolationParams = IsolationParams(),
    results: list[BandResult] | None = None,
) -> TempoEstimate:
    """
    Select the beat-carrying band and estimate its tempo.

    Parameters
    ----------
    envelopes : sequence of OnsetEnvelope   r_1 … r_Q (at least one).
    params    : IsolationParams
    results   : list[BandResult] | None     Pre-computed scores (skips re-scoring).

    Raises
    ------
    IsolationFailure
        If no band scores within ε of 1.
    """
    if not envelopes:
        raise ConfigurationError("isolate needs at least one envelope.")
    if results is None:
        results = score_envelopes(envelopes, params)

    scores = [r.b for r in results]
    degenerate = [r.band_index for r in results if r.degenerate]
    for r in results:
        logger.info("Band %2d  b=%.6f%s", r.band_index, r.b, "  (degenerate)" if r.degenerate else "")

    try:
        members, best_pos = select_band(scores, params.epsilon)
    except IsolationFailure:
        raise IsolationFailure(scores=scores, degenerate_bands=degenerate, epsilon=params.epsilon) from None

    chosen = results[best_pos - 1]
    rate = envelopes[best_pos - 1].effective_rate
    bpm = bpm_estimate(chosen.score.best, rate)
    logger.info("I*=%s → band %d (b=%.6f), %.0f BPM.", members, chosen.band_index, chosen.b, bpm)
    return TempoEstimate(
        selected_band=chosen.band_index,
        score=chosen.b,
        best_gaps=chosen.score.best.gaps,
        bpm=bpm,
        effective_rate=rate,
        isolation_set=[results[i - 1].band_index for i in members],
        scores=scores,
    )


def write_diagnostics_json(results: Sequence[BandResult], target: str | os.PathLike | TextIO) -> None:
    """Per-band scores, best threshold, gaps and v_j traces as JSON."""
    payload = {"bands": [r.to_dict() for r in results]}
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
        return
    json.dump(payload, target, indent=2)
