"""
isolation/clustering.py — Threshold clustering & regularity score
==================================================================
For a threshold h the supra-threshold index set

    I = {k : r̂[k] ≥ h}

is split into maximal runs of consecutive indices.  A run's centroid is
the mean of its indices, i.e. (first + last) / 2.  If the runs are beat
onsets, the gaps between consecutive centroids are all close to the beat
period, and the regularity score

    v = (Σ c) / (√len(c) · ‖c‖₂)

(the cosine between the gap vector c and the all-ones direction) is
close to 1.  v is exactly 1 for equal gaps and stays in [0, 1] because
gaps are positive.

With fewer than three runs the cosine is trivially 1 or undefined, so
the score is 0 below `min_runs` runs.

`score_band` sweeps H thresholds l_j = (j−1) · max(r̂) / H, j = 1 … H,
and keeps the best one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from config import MIN_RUNS
from utils.errors import ConfigurationError


@dataclass(frozen=True)
class ClusterAnalysis:
    """
    Runs of r̂ above one threshold.

    Attributes
    ----------
    threshold : float
    bounds    : ndarray, shape (R, 2)  Inclusive [first, last] index of every run.
    centroids : ndarray, shape (R,)
    gaps      : ndarray, shape (R−1,)  Consecutive centroid differences.
    score     : float                  Regularity score v.
    """
    threshold: float
    bounds: np.ndarray
    centroids: np.ndarray
    gaps: np.ndarray
    score: float

    @property
    def runs(self) -> list[np.ndarray]:
        """The runs as explicit index arrays, sorted by first index."""
        return [np.arange(lo, hi + 1) for lo, hi in self.bounds]

    @property
    def n_runs(self) -> int:
        return int(self.bounds.shape[0])


def regularity_score(gaps: np.ndarray, min_runs: int = MIN_RUNS) -> float:
    """Cosine between `gaps` and the all-ones vector; 0 with fewer than `min_runs` runs."""
    gaps = np.asarray(gaps, dtype=np.float64)
    n_gaps = gaps.size
    if n_gaps < 1 or n_gaps + 1 < min_runs:
        return 0.0
    norm = np.linalg.norm(gaps)
    if norm == 0.0:
        return 0.0
    v = gaps.sum() / (np.sqrt(n_gaps) * norm)
    return float(min(max(v, 0.0), 1.0))


def clusters_at_threshold(r_hat: np.ndarray, h: float, min_runs: int = MIN_RUNS) -> ClusterAnalysis:
    """
    Cluster the indices where r̂ ≥ h into runs and score their spacing.

    An empty index set gives no runs and a score of 0.
    """
    if h < 0:
        raise ConfigurationError(f"Threshold must be ≥ 0, got {h}.")
    mask = np.asarray(r_hat, dtype=np.float64) >= h
    edges = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    first = np.flatnonzero(edges == 1)
    last = np.flatnonzero(edges == -1) - 1
    centroids = (first + last) / 2.0
    gaps = np.diff(centroids)
    return ClusterAnalysis(
        threshold=float(h),
        bounds=np.column_stack((first, last)) if first.size else np.empty((0, 2), dtype=np.intp),
        centroids=centroids,
        gaps=gaps,
        score=regularity_score(gaps, min_runs),
    )


def threshold_levels(peak: float, steps: int) -> np.ndarray:
    """Lower edges of H equal segments of [0, peak]."""
    return np.arange(steps, dtype=np.float64) * peak / steps


@dataclass(frozen=True)
class BandScore:
    """
    Best regularity score over the threshold sweep.

    Attributes
    ----------
    b              : float            max_j v_j.
    best           : ClusterAnalysis  Clustering at the first threshold reaching b.
    best_threshold : int              1-based j of that threshold.
    trace          : ndarray          v_j for j = 1 … H.
    """
    b: float
    best: ClusterAnalysis
    best_threshold: int
    trace: np.ndarray = field(repr=False)


def score_band(r_hat: np.ndarray, steps: int, min_runs: int = MIN_RUNS) -> BandScore:
    """
    Sweep `steps` thresholds over [0, max(r̂)] and keep the most regular clustering.

    Ties go to the smallest j.  An all-zero r̂ scores 0.
    """
    if steps < 2:
        raise ConfigurationError(f"Threshold steps H must be ≥ 2, got {steps}.")
    r_hat = np.asarray(r_hat, dtype=np.float64)
    peak = float(r_hat.max()) if r_hat.size else 0.0
    if peak <= 0.0:
        empty = clusters_at_threshold(np.zeros(0), 0.0, min_runs)
        return BandScore(b=0.0, best=empty, best_threshold=1, trace=np.zeros(steps))

    analyses = [clusters_at_threshold(r_hat, h, min_runs) for h in threshold_levels(peak, steps)]
    trace = np.array([a.score for a in analyses])
    j = int(np.argmax(trace))
    return BandScore(b=float(trace[j]), best=analyses[j], best_threshold=j + 1, trace=trace)
