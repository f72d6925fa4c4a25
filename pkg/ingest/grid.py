"""
ingest/grid.py — Decimation and analysis-grid fitting
======================================================
The S-transform stage needs a downsampled length M = 2QK so that its
M/2 frequency rows split into exactly Q subbands of K rows.  This module
decimates by the integer factor D and trims the input to the matching
length.

No anti-aliasing filter
-----------------------
Decimation is bare index selection, y[n] = x[nD].  Everything above the
new Nyquist frequency folds back into the analysis band.  The usual
mitigation is choosing D so that the effective rate stays at or above
1024 Hz (rhythm instruments rarely exceed 512 Hz); `downsample` warns
when that is not the case.

Trimming
--------
`fit_to_grid` keeps the start of the excerpt and drops the tail.
"""

from __future__ import annotations

from dataclasses import dataclass

from config import MIN_EFFECTIVE_RATE_HZ
from ingest.audio import AudioBuffer
from utils.errors import ConfigurationError, InsufficientAudioError
from utils.logger import get_logger

logger = get_logger("ingest.grid")


@dataclass(frozen=True)
class GridConfig:
    """
    Parameters that tie the input length to the subband layout.

    Attributes
    ----------
    downsample_factor : int   D, positive and even.
    subband_size      : int   K, frequency rows per subband.
    subband_count     : int   Q, number of subbands.
    """
    downsample_factor: int
    subband_size: int
    subband_count: int

    def __post_init__(self):
        validate_downsample_factor(self.downsample_factor)
        if self.subband_size < 1:
            raise ConfigurationError(f"K must be a positive integer, got {self.subband_size}.")
        if self.subband_count < 1:
            raise ConfigurationError(f"Q must be a positive integer, got {self.subband_count}.")

    @property
    def grid_length(self) -> int:
        """M = 2QK, the downsampled length after fitting."""
        return 2 * self.subband_count * self.subband_size

    @property
    def required_samples(self) -> int:
        """Minimum input length, 2QKD."""
        return self.grid_length * self.downsample_factor


def validate_downsample_factor(d: int) -> None:
    if not isinstance(d, int) or isinstance(d, bool):
        raise ConfigurationError(f"D must be an integer, got {d!r}.")
    if d < 2 or d % 2 != 0:
        raise ConfigurationError(f"D must be an even integer ≥ 2, got {d}.")


def downsample(buf: AudioBuffer, d: int) -> AudioBuffer:
    """
    Keep every D-th sample: output[n] = buf[nD].

    Returns
    -------
    AudioBuffer
        Length M = 1 + ⌊(N−1)/D⌋ at sample rate f_s / D.
    """
    validate_downsample_factor(d)
    out = AudioBuffer(samples=buf.samples[::d], sample_rate=buf.sample_rate / d)
    if out.sample_rate < MIN_EFFECTIVE_RATE_HZ:
        logger.warning(
            "Effective rate %.2f Hz is below %.0f Hz; rhythm-band content will alias.",
            out.sample_rate, MIN_EFFECTIVE_RATE_HZ,
        )
    logger.debug("Downsampled %d → %d samples (D=%d, %.2f Hz).", len(buf), len(out), d, out.sample_rate)
    return out


def fit_to_grid(buf: AudioBuffer, cfg: GridConfig) -> AudioBuffer:
    """
    Trim `buf` so that downsampling by D yields exactly M = 2QK samples.

    Returns the prefix of length 2QKD, the largest length N′ with
    ⌊(N′−1)/D⌋ = 2QK − 1.  Conforming input is returned unchanged.

    Raises
    ------
    InsufficientAudioError
        If the buffer holds fewer than 2QKD samples.
    """
    required = cfg.required_samples
    n = len(buf)
    if n < required:
        raise InsufficientAudioError(required=required, actual=n)
    if n == required:
        return buf
    return AudioBuffer(samples=buf.samples[:required], sample_rate=buf.sample_rate)


def derive_subband_size(n_samples: int, d: int, q: int) -> int:
    """
    Largest K such that 2QKD ≤ N, i.e. K = ⌊⌊N/D⌋ / (2Q)⌋.

    This is how K is chosen when the caller only fixes Q: the grid then
    covers as much of the excerpt as possible.
    """
    validate_downsample_factor(d)
    if q < 1:
        raise ConfigurationError(f"Q must be a positive integer, got {q}.")
    k = (n_samples // d) // (2 * q)
    if k < 1:
        raise InsufficientAudioError(required=2 * q * d, actual=n_samples)
    return k
