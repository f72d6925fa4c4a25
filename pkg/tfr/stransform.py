"""
tfr/stransform.py — Normalised DFT & discrete S-transform
==========================================================
Time-frequency representation used for onset detection.

DFT
---
    Y[k] = (1/M) Σ_n y[n] · exp(−j2πnk/M)

The 1/M factor is part of the definition: a constant signal c has
Y[0] = c, a unit cosine on bin q has Y[q] = Y[M−q] = 0.5.

S-transform
-----------
For frequency row p ≠ 0 and time column n

    F[p, n] = Σ_m Y[(m+p) mod M] · exp(−2π² m′² / p²) · exp(+j2πmn/M)

with the circular lag m′ = min(m, M−m), so the Gaussian voice window is
symmetric around the voice.  Row 0 is the signal mean for every n.  The
magnitude S = |F| has M/2 rows (frequency p · f_s / M Hz) and M columns
(time n / f_s s).

Each row is one pointwise product followed by one inverse FFT, so a full
matrix costs O(M² log M).  Averaging any row of F over time gives back
Y[p] exactly: only lag m = 0 survives the sum, where the window is 1.

Memory
------
At the default settings M is around 22 000, so the full magnitude matrix
would be ~2 GB.  `STMagnitude` therefore evaluates rows on demand in
blocks and callers reduce them as they go (see envelopes/bands.py).

Runtime
-------
The inverse FFTs dominate.  A 20 s excerpt at the defaults (M = 22060,
whose largest prime factor is 1103) takes roughly 15 to 20 s on one core;
scipy.fft spreads each block over `worker_count()` threads, capped by
``STBEAT_THREADS``.  Voice windows are zeroed below `WINDOW_FLOOR`,
which spares the exponential on the low rows but not the FFT.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterator, TextIO

import numpy as np
import scipy.fft
from numpy.lib.stride_tricks import sliding_window_view

from config import ST_ROW_BLOCK, ST_WINDOW_FLOOR, worker_count
from utils.errors import ConfigurationError, SignalValidationError
from utils.logger import get_logger

logger = get_logger("tfr.stransform")

WINDOW_FLOOR = ST_WINDOW_FLOOR
# exp(−2π²m′²/p²) < WINDOW_FLOOR once m′ > p · _WINDOW_REACH
_WINDOW_REACH = float(np.sqrt(-np.log(WINDOW_FLOOR) / (2.0 * np.pi ** 2)))


@dataclass(frozen=True)
class Spectrum:
    """Normalised DFT bins Y[0 … M−1] of a real signal."""
    bins: np.ndarray

    def __post_init__(self):
        bins = np.array(self.bins, dtype=np.complex128, copy=True).reshape(-1)
        bins.setflags(write=False)
        object.__setattr__(self, "bins", bins)

    def __len__(self) -> int:
        return int(self.bins.size)


def dft(y: np.ndarray) -> Spectrum:
    """
    M-point DFT with 1/M normalisation.

    Parameters
    ----------
    y : ndarray, shape (M,)   Real, finite samples (M ≥ 1).
    """
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.size < 1:
        raise SignalValidationError("DFT input must contain at least one sample.")
    if not np.all(np.isfinite(y)):
        raise SignalValidationError("DFT input contains NaN or Inf.")
    return Spectrum(bins=scipy.fft.fft(y) / y.size)


def circular_lag(m_len: int) -> np.ndarray:
    """m′ = min(m, M−m) for m = 0 … M−1."""
    m = np.arange(m_len)
    return np.minimum(m, m_len - m)


def voice_windows(m_len: int, voices: np.ndarray) -> np.ndarray:
    """
    Gaussian voice windows exp(−2π²m′²/p²), one row per voice p ≥ 1.

    Weights below `WINDOW_FLOOR` are exactly zero, and the exponential is
    only evaluated out to the lag where the widest voice of the batch
    falls below the floor.  Each row depends on its own voice alone, so
    the result does not depend on how voices are batched.
    """
    p = np.asarray(voices, dtype=np.float64)
    window = np.zeros((p.size, m_len), dtype=np.float64)
    if p.size == 0:
        return window
    reach = int(np.ceil(p.max() * _WINDOW_REACH))
    lag = circular_lag(m_len)
    cols = np.flatnonzero(lag <= reach)
    values = np.exp(-2.0 * np.pi ** 2 * lag[cols].astype(np.float64) ** 2 / p[:, None] ** 2)
    values[values < WINDOW_FLOOR] = 0.0
    window[:, cols] = values
    return window


def st_rows(
    spec: Spectrum,
    y_mean: float,
    start: int,
    stop: int,
    workers: int | None = None,
) -> np.ndarray:
    """
    Complex S-transform rows F[start:stop, :].

    Rows are independent of each other; any block partition gives the
    same values.

    Returns
    -------
    F : ndarray, shape (stop − start, M), complex128
    """
    bins = spec.bins
    m_len = bins.size
    if not 0 <= start <= stop <= m_len // 2:
        raise ConfigurationError(f"Row range [{start}, {stop}) outside 0 … {m_len // 2}.")

    p = np.arange(start, stop)
    out = np.empty((p.size, m_len), dtype=np.complex128)
    if p.size == 0:
        return out

    voices = p[p != 0]
    if voices.size:
        # shifted[i, m] = Y[(m + p_i) mod M] without building an index matrix
        doubled = np.concatenate([bins, bins])
        shifted = sliding_window_view(doubled, m_len)[voices]
        window = voice_windows(m_len, voices)
        rows = scipy.fft.ifft(shifted * window, axis=1, workers=workers or worker_count())
        out[p != 0] = rows * m_len

    if start == 0:
        out[0, :] = y_mean
    return out


@dataclass(frozen=True)
class STMagnitude:
    """
    Absolute discrete S-transform S = |F| of shape (M/2, M), evaluated lazily.

    Attributes
    ----------
    spectrum       : Spectrum  DFT of the downsampled signal.
    y_mean         : float     Signal mean (row 0).
    effective_rate : float     Sample rate of the downsampled signal (Hz).
    block_rows     : int       Rows evaluated per block.
    """
    spectrum: Spectrum
    y_mean: float
    effective_rate: float = 1.0
    block_rows: int = ST_ROW_BLOCK
    workers: int | None = field(default=None, compare=False)

    @property
    def n_cols(self) -> int:
        return len(self.spectrum)

    @property
    def n_rows(self) -> int:
        return self.n_cols // 2

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    def frequencies_hz(self) -> np.ndarray:
        """Centre frequency of each row, p · f_s / M."""
        return np.arange(self.n_rows) * self.effective_rate / self.n_cols

    def rows(self, start: int, stop: int) -> np.ndarray:
        """Magnitude rows S[start:stop, :]."""
        return np.abs(st_rows(self.spectrum, self.y_mean, start, stop, self.workers))

    def iter_blocks(self, start: int = 0, stop: int | None = None) -> Iterator[tuple[int, np.ndarray]]:
        """Yield `(first_row, S[first_row:first_row + block])` covering [start, stop)."""
        stop = self.n_rows if stop is None else stop
        for lo in range(start, stop, self.block_rows):
            hi = min(lo + self.block_rows, stop)
            yield lo, self.rows(lo, hi)

    def to_array(self) -> np.ndarray:
        """Materialise the whole (M/2) × M matrix.  Only sensible for small M."""
        out = np.empty(self.shape, dtype=np.float64)
        for lo, block in self.iter_blocks():
            out[lo:lo + block.shape[0]] = block
        return out


def stransform(
    spec: Spectrum,
    y_mean: float,
    effective_rate: float = 1.0,
    block_rows: int = ST_ROW_BLOCK,
) -> STMagnitude:
    """
    Build the absolute S-transform of a signal from its spectrum.

    Raises
    ------
    ConfigurationError
        If M is odd or smaller than 2.
    """
    m_len = len(spec)
    if m_len < 2 or m_len % 2 != 0:
        raise ConfigurationError(f"S-transform needs an even length M ≥ 2, got M={m_len}.")
    if block_rows < 1:
        raise ConfigurationError(f"block_rows must be ≥ 1, got {block_rows}.")
    st = STMagnitude(spectrum=spec, y_mean=float(y_mean), effective_rate=effective_rate, block_rows=block_rows)
    logger.debug(
        "S-transform %d×%d (top row %.2f Hz).",
        st.n_rows, st.n_cols, st.frequencies_hz()[-1],
    )
    return st


def write_matrix_csv(st: STMagnitude, target: str | os.PathLike | TextIO) -> None:
    """
    Dump S row-major, one frequency row per line, for external plotting.
    """
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_matrix_csv(st, fh)
        return
    for _, block in st.iter_blocks():
        np.savetxt(target, block, delimiter=",", fmt="%.10g")
