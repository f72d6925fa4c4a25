"""
isolation/precondition.py — Envelope preconditioning
=====================================================
Three steps turn a raw onset envelope r into the rectified sequence r̂
that the threshold clustering works on:

    1. Normalisation   r̃ = r / ‖r‖_∞
    2. Upper envelope  u  = natural cubic spline through the local maxima
                            of r̃ that are at least n_p samples apart
                            (plus both end points)
    3. Centering       r̂ = max(0, r̃ − mean(u))

The level mean(u) separates the tall, onset-carrying part of the
envelope from the low-level background, which rarely carries beat
information.

Local maxima are strict: r̃[k−1] < r̃[k] > r̃[k+1].  When two maxima are
closer than n_p samples the taller one wins (ties go to the lower index),
the same greedy suppression `scipy.signal.find_peaks(distance=…)` uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import find_peaks as _local_maxima

from utils.errors import ConfigurationError, DegenerateEnvelopeError


@dataclass(frozen=True)
class PreconditionedEnvelope:
    """
    Attributes
    ----------
    normalized : ndarray   r̃, max |r̃| = 1.
    peaks      : ndarray   Knot indices used for the upper envelope (without end points).
    upper      : ndarray   u, spline upper envelope.
    level      : float     mean(u), the rectification level.
    centered   : ndarray   r̂ = max(0, r̃ − level).
    """
    normalized: np.ndarray
    peaks: np.ndarray
    upper: np.ndarray
    level: float
    centered: np.ndarray


def normalize(r: np.ndarray) -> np.ndarray:
    """
    Scale an envelope to unit ℓ∞ norm.

    Raises
    ------
    DegenerateEnvelopeError
        If every entry is zero.
    """
    r = np.asarray(r, dtype=np.float64)
    peak = np.max(np.abs(r)) if r.size else 0.0
    if peak == 0.0:
        raise DegenerateEnvelopeError("Envelope is identically zero and cannot be normalised.")
    return r / peak


def find_peaks(x: np.ndarray, n_p: int) -> np.ndarray:
    """
    Strict local maxima of `x`, pairwise at least `n_p` samples apart.

    Parameters
    ----------
    x   : ndarray, shape (M,)
    n_p : int   Minimum separation between returned indices.

    Returns
    -------
    ndarray of int
        Sorted indices; empty if `x` has fewer than 3 samples or no peak.
    """
    if n_p < 1:
        raise ConfigurationError(f"Peak separation n_p must be ≥ 1, got {n_p}.")
    x = np.asarray(x, dtype=np.float64)
    if x.size < 3:
        return np.empty(0, dtype=np.intp)

    # plateau_size=(1, 1) keeps strict maxima only
    candidates, _ = _local_maxima(x, plateau_size=(1, 1))
    if candidates.size == 0 or n_p == 1:
        return candidates.astype(np.intp)

    # Highest first; equal heights → lower index first
    order = np.lexsort((candidates, -x[candidates]))
    keep = np.ones(candidates.size, dtype=bool)
    for i in order:
        if not keep[i]:
            continue
        k = candidates[i]
        lo = np.searchsorted(candidates, k - n_p + 1, side="left")
        hi = np.searchsorted(candidates, k + n_p - 1, side="right")
        keep[lo:i] = False
        keep[i + 1:hi] = False
    return candidates[keep].astype(np.intp)


def upper_envelope(x: np.ndarray, peaks: np.ndarray) -> np.ndarray:
    """
    Natural cubic spline through the peaks and both end points of `x`.

    The spline passes exactly through every knot.  With fewer than two
    distinct knots the envelope is the constant max(x).
    """
    x = np.asarray(x, dtype=np.float64)
    m_len = x.size
    if m_len < 2:
        raise ConfigurationError(f"Upper envelope needs at least 2 samples, got {m_len}.")

    knots = np.unique(np.concatenate(([0], np.asarray(peaks, dtype=np.intp), [m_len - 1])))
    if knots.size < 2:
        return np.full(m_len, x.max())

    spline = CubicSpline(knots, x[knots], bc_type="natural")
    u = spline(np.arange(m_len, dtype=np.float64))
    u[knots] = x[knots]
    return u


def center_rectify(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """r̂ = max(0, x − mean(u)), entrywise."""
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if x.shape != u.shape:
        raise ConfigurationError(f"Envelope and upper envelope differ in shape: {x.shape} vs {u.shape}.")
    return np.maximum(0.0, x - u.mean())


def precondition(r: np.ndarray, n_p: int) -> PreconditionedEnvelope:
    """Run normalisation, upper-envelope and centering on one envelope."""
    r_tilde = normalize(r)
    peaks = find_peaks(r_tilde, n_p)
    u = upper_envelope(r_tilde, peaks)
    return PreconditionedEnvelope(
        normalized=r_tilde,
        peaks=peaks,
        upper=u,
        level=float(u.mean()),
        centered=center_rectify(r_tilde, u),
    )
