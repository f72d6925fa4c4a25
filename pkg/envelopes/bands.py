"""
envelopes/bands.py — Subband split & onset envelopes
=====================================================
The S-transform magnitude S (M/2 × M) is cut by rows into Q contiguous
blocks of K rows, band 1 holding the lowest frequencies:

    S = [S_1ᵀ S_2ᵀ … S_Qᵀ]ᵀ,   S_i ∈ R^{K×M}

Each band's onset envelope is its per-time-bin row mean

    r_i[n] = (1/K) Σ_rows S_i[row, n]

Bands are equal-width and non-overlapping.  A subband width of roughly
50 Hz (config.SUGGESTED_BAND_WIDTH_HZ) tends to keep a rhythm instrument
inside one band without masking it by unrelated partials;
`band_width_hz` reports the width a given K produces.

Streaming
---------
`Subband` refers to a row range of a lazily evaluated `STMagnitude`;
`band_mean` reduces such a band block by block, so only one block of
rows is ever resident.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from config import SUGGESTED_BAND_WIDTH_HZ
from tfr.stransform import STMagnitude
from utils.errors import ConfigurationError
from utils.logger import get_logger

logger = get_logger("envelopes.bands")


@dataclass(frozen=True)
class Subband:
    """Rows [row_start, row_stop) of an S-transform magnitude; `index` is 1-based."""
    st: STMagnitude
    index: int
    row_start: int
    row_stop: int

    @property
    def size(self) -> int:
        return self.row_stop - self.row_start

    @property
    def edges_hz(self) -> tuple[float, float]:
        scale = self.st.effective_rate / self.st.n_cols
        return self.row_start * scale, self.row_stop * scale

    def matrix(self) -> np.ndarray:
        """The K × M block of magnitudes."""
        return self.st.rows(self.row_start, self.row_stop)


@dataclass(frozen=True)
class SubbandSet:
    """Ordered subbands of one S-transform magnitude."""
    bands: tuple[Subband, ...]
    subband_size: int

    def __len__(self) -> int:
        return len(self.bands)

    def __iter__(self):
        return iter(self.bands)

    def __getitem__(self, i: int) -> Subband:
        return self.bands[i]

    @property
    def band_edges(self) -> list[tuple[float, float]]:
        return [band.edges_hz for band in self.bands]

    def to_array(self) -> np.ndarray:
        """Stack every band back into the full matrix."""
        return np.vstack([band.matrix() for band in self.bands])


@dataclass(frozen=True)
class OnsetEnvelope:
    """
    Onset envelope r_i of one subband.

    Attributes
    ----------
    values         : ndarray, shape (M,)  Non-negative row means.
    band_index     : int                  1 … Q.
    effective_rate : float                Envelope sample rate (Hz).
    """
    values: np.ndarray
    band_index: int = 1
    effective_rate: float = 1.0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)


def band_width_hz(k: int, m_len: int, effective_rate: float) -> float:
    """Width of a K-row subband in Hz, K · f_s / M."""
    return k * effective_rate / m_len


def split_bands(st: STMagnitude, k: int) -> SubbandSet:
    """
    Partition the rows of `st` into Q = (M/2)/K consecutive blocks.

    Raises
    ------
    ConfigurationError
        If K does not divide M/2.
    """
    n_rows = st.n_rows
    if k < 1 or n_rows % k != 0:
        raise ConfigurationError(
            f"Subband size K={k} does not divide M/2={n_rows}."
        )
    q = n_rows // k
    bands = tuple(
        Subband(st=st, index=i + 1, row_start=i * k, row_stop=(i + 1) * k)
        for i in range(q)
    )
    width = band_width_hz(k, st.n_cols, st.effective_rate)
    logger.info("Split %d×%d S-matrix into Q=%d bands of K=%d rows (%.1f Hz each).",
                st.n_rows, st.n_cols, q, k, width)
    if width > 2 * SUGGESTED_BAND_WIDTH_HZ:
        logger.debug("Bands are %.1f Hz wide; several instruments may share one band.", width)
    return SubbandSet(bands=bands, subband_size=k)


def band_mean(band: Subband | np.ndarray, band_index: int = 1, effective_rate: float = 1.0) -> OnsetEnvelope:
    """
    Per-time-bin mean over the rows of a band.

    Parameters
    ----------
    band : Subband or ndarray, shape (K, M)
        A lazily evaluated subband is reduced block by block; its own
        index and rate override the keyword arguments.
    """
    if isinstance(band, Subband):
        total = np.zeros(band.st.n_cols, dtype=np.float64)
        for _, block in band.st.iter_blocks(band.row_start, band.row_stop):
            total += block.sum(axis=0)
        return OnsetEnvelope(
            values=total / band.size,
            band_index=band.index,
            effective_rate=band.st.effective_rate,
        )

    matrix = np.asarray(band, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] == 0 or matrix.shape[1] == 0:
        raise ConfigurationError(f"band_mean expects a non-empty K×M matrix, got shape {matrix.shape}.")
    return OnsetEnvelope(
        values=matrix.mean(axis=0),
        band_index=band_index,
        effective_rate=effective_rate,
    )


def onset_envelopes(subbands: SubbandSet) -> list[OnsetEnvelope]:
    """Envelopes r_1 … r_Q in band order."""
    return [band_mean(band) for band in subbands]


def write_envelopes_csv(
    envelopes: Sequence[OnsetEnvelope],
    band_edges: Sequence[tuple[float, float]],
    target: str | os.PathLike | TextIO,
) -> None:
    """
    Write one column per band and one row per time bin.

    The header cell of each column is the band's frequency range,
    e.g. ``55.12-110.25``.
    """
    if len(envelopes) != len(band_edges):
        raise ConfigurationError("Need one band-edge pair per envelope.")
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_envelopes_csv(envelopes, band_edges, fh)
        return

    writer = csv.writer(target)
    writer.writerow([f"{lo:.2f}-{hi:.2f}" for lo, hi in band_edges])
    if not envelopes:
        return
    table = np.column_stack([env.values for env in envelopes])
    for row in table:
        writer.writerow([f"{v:.10g}" for v in row])
