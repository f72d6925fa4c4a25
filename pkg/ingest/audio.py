"""
ingest/audio.py — WAV decoding to mono float buffers
=====================================================
Reads 16-bit PCM or 32-bit float RIFF/WAV files (mono or stereo, any
sample rate) with `scipy.io.wavfile` and returns an immutable
`AudioBuffer` scaled to [−1, 1].

Stereo is mixed down by the arithmetic mean of the two channels.

Error mapping
-------------
    file missing / unreadable       →  AudioReadError
    malformed or truncated RIFF     →  AudioDecodeError
    other bit depths, > 2 channels  →  UnsupportedEncodingError
    no samples                      →  EmptyAudioError
"""

from __future__ import annotations

import io
import os
import struct
from dataclasses import dataclass
from typing import BinaryIO

import numpy as np
from scipy.io import wavfile

from utils.errors import (
    AudioDecodeError,
    AudioReadError,
    ConfigurationError,
    EmptyAudioError,
    SignalValidationError,
    UnsupportedEncodingError,
)
from utils.logger import get_logger

logger = get_logger("ingest.audio")

# int16 full scale; reading divides by this, writing multiplies by it
_PCM16_SCALE = 32768.0


@dataclass(frozen=True)
class AudioBuffer:
    """
    A mono, finite, real-valued signal with its sample rate.

    `samples` is stored as a read-only float64 array so a buffer can be
    shared between threads without copying.  `sample_rate` is a float
    because downsampling by D keeps the exact rational rate
    (44100 / 40 = 1102.5 Hz).
    """
    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64, copy=True).reshape(-1)
        if samples.size < 1:
            raise EmptyAudioError("AudioBuffer needs at least one sample.")
        if not np.all(np.isfinite(samples)):
            raise SignalValidationError("AudioBuffer samples must be finite (no NaN/Inf).")
        if not self.sample_rate > 0:
            raise ConfigurationError(f"sample_rate must be positive, got {self.sample_rate}.")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return len(self) / self.sample_rate


def _to_float(data: np.ndarray) -> np.ndarray:
    if data.dtype == np.int16:
        return data.astype(np.float64) / _PCM16_SCALE
    if data.dtype == np.float32:
        return data.astype(np.float64)
    raise UnsupportedEncodingError(
        f"Unsupported WAV sample format {data.dtype}; expected 16-bit PCM or 32-bit float."
    )


def load_mono(source: str | os.PathLike | BinaryIO) -> AudioBuffer:
    """
    Decode a WAV file into a mono `AudioBuffer`.

    Parameters
    ----------
    source : path or binary file object
        16-bit PCM or 32-bit float WAV, one or two channels.

    Returns
    -------
    AudioBuffer
        Samples in [−1, 1]; sample rate from the file header.
    """
    try:
        rate, data = wavfile.read(source)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        raise AudioReadError(f"Cannot read audio file {source!r}: {exc}") from exc
    except (ValueError, EOFError, struct.error, IndexError) as exc:
        raise AudioDecodeError(f"Cannot decode WAV data from {source!r}: {exc}") from exc

    if data.ndim == 2:
        channels = data.shape[1]
        if channels not in (1, 2):
            raise UnsupportedEncodingError(f"Only mono or stereo WAV is supported, got {channels} channels.")
    if data.shape[0] == 0:
        raise EmptyAudioError(f"WAV file {source!r} contains no samples.")

    samples = _to_float(data)
    if samples.ndim == 2:
        samples = samples.mean(axis=1)

    logger.debug("Loaded %d samples at %d Hz from %r.", samples.size, rate, source)
    return AudioBuffer(samples=samples, sample_rate=float(rate))


def load_mono_bytes(payload: bytes) -> AudioBuffer:
    """Decode an in-memory WAV payload (used by the HTTP API)."""
    return load_mono(io.BytesIO(payload))


def write_wav(buf: AudioBuffer, target: str | os.PathLike | BinaryIO) -> None:
    """
    Write `buf` as a 16-bit mono PCM WAV.

    Samples are clipped to the int16 range, so values at exactly +1.0
    saturate to 32767.  The sample rate must be an integer.
    """
    if float(buf.sample_rate) != int(buf.sample_rate):
        raise ConfigurationError(
            f"WAV output needs an integer sample rate, got {buf.sample_rate}."
        )
    pcm = np.clip(np.round(buf.samples * _PCM16_SCALE), -32768, 32767).astype(np.int16)
    wavfile.write(target, int(buf.sample_rate), pcm)


def select_window(
    buf: AudioBuffer,
    offset_seconds: float = 0.0,
    window_seconds: float | None = None,
) -> AudioBuffer:
    """
    Cut the analysis excerpt out of a longer recording.

    A few seconds of music are enough to expose the beat (4 s cover one
    full bar even at 60 BPM), and the S-transform cost grows quickly with
    length, so long files are analysed one window at a time.

    Parameters
    ----------
    offset_seconds : float         Start of the excerpt.
    window_seconds : float | None  Excerpt length; None keeps everything after the offset.
    """
    if offset_seconds < 0:
        raise ConfigurationError(f"offset must be ≥ 0 s, got {offset_seconds}.")
    if window_seconds is not None and window_seconds <= 0:
        raise ConfigurationError(f"window must be > 0 s, got {window_seconds}.")

    start = int(round(offset_seconds * buf.sample_rate))
    if start >= len(buf):
        raise ConfigurationError(
            f"offset {offset_seconds} s lies beyond the end of the audio ({buf.duration:.3f} s)."
        )
    stop = len(buf)
    if window_seconds is not None:
        stop = min(stop, start + int(round(window_seconds * buf.sample_rate)))
    if start == 0 and stop == len(buf):
        return buf
    return AudioBuffer(samples=buf.samples[start:stop], sample_rate=buf.sample_rate)
