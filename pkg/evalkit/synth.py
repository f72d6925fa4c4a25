"""
evalkit/synth.py — Synthetic click tracks
==========================================
Dataset-free test material: raised-cosine windowed sine bursts at a
low carrier frequency, one every 60/bpm seconds starting at t = 0, plus
optional uniform noise.  The carrier should lie in the rhythm band
(32–512 Hz) so it survives decimation to ~1 kHz.

Tracks are deterministic for a given seed.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.signal.windows import hann

from config import (
    RHYTHM_BAND_HZ,
    SYNTH_AMPLITUDE,
    SYNTH_BPM_RANGE,
    SYNTH_BURST_SECONDS,
    SYNTH_CARRIER_HZ,
    SYNTH_DURATION_SECONDS,
    SYNTH_NOISE_AMP,
    SYNTH_SAMPLE_RATE,
)
from evalkit.dataset import GroundTruthEntry, write_manifest
from ingest.audio import AudioBuffer, write_wav
from utils.errors import ConfigurationError
from utils.logger import get_logger

logger = get_logger("evalkit.synth")


def _validate(bpm, duration, carrier_hz, sample_rate, noise_amp, amplitude):
    lo, hi = SYNTH_BPM_RANGE
    if not lo <= bpm <= hi:
        raise ConfigurationError(f"bpm must lie in [{lo:g}, {hi:g}], got {bpm:g}.")
    if duration <= 0:
        raise ConfigurationError(f"duration must be positive, got {duration:g} s.")
    if sample_rate <= 0 or int(sample_rate) != sample_rate:
        raise ConfigurationError(f"sample_rate must be a positive integer, got {sample_rate}.")
    f_lo, f_hi = RHYTHM_BAND_HZ
    if not f_lo <= carrier_hz <= f_hi:
        raise ConfigurationError(f"carrier must lie in [{f_lo:g}, {f_hi:g}] Hz, got {carrier_hz:g}.")
    if carrier_hz >= sample_rate / 2:
        raise ConfigurationError(f"carrier {carrier_hz:g} Hz is above Nyquist for {sample_rate} Hz.")
    if noise_amp < 0:
        raise ConfigurationError(f"noise_amp must be ≥ 0, got {noise_amp:g}.")
    if amplitude <= 0 or amplitude + noise_amp > 1.0:
        raise ConfigurationError(
            f"amplitude ({amplitude:g}) + noise_amp ({noise_amp:g}) must stay within (0, 1]."
        )


def onset_samples(bpm: float, n_samples: int, sample_rate: int) -> np.ndarray:
    """Sample index of every burst onset in a track of `n_samples`."""
    period = 60.0 * sample_rate / bpm
    count = int(np.ceil(n_samples / period))
    onsets = np.round(np.arange(count) * period).astype(np.int64)
    return onsets[onsets < n_samples]


def synth_click_track(
    bpm: float,
    duration: float = SYNTH_DURATION_SECONDS,
    carrier_hz: float = SYNTH_CARRIER_HZ,
    sample_rate: int = SYNTH_SAMPLE_RATE,
    noise_amp: float = SYNTH_NOISE_AMP,
    seed: int = 0,
    amplitude: float = SYNTH_AMPLITUDE,
    burst_seconds: float = SYNTH_BURST_SECONDS,
) -> AudioBuffer:
    """
    Generate a click track at a known tempo.

    Parameters
    ----------
    bpm           : float  Tempo, 30 … 300.
    duration      : float  Length in seconds.
    carrier_hz    : float  Burst carrier frequency (32 … 512 Hz).
    sample_rate   : int    Output rate (Hz).
    noise_amp     : float  Half-width of the uniform noise; 0 → exact silence between bursts.
    seed          : int    Noise seed.
    amplitude     : float  Burst peak amplitude.
    burst_seconds : float  Burst length (raised-cosine window).
    """
    _validate(bpm, duration, carrier_hz, sample_rate, noise_amp, amplitude)
    sample_rate = int(sample_rate)
    n_samples = int(round(duration * sample_rate))
    n_burst = max(3, int(round(burst_seconds * sample_rate)))

    t = np.arange(n_burst) / sample_rate
    burst = amplitude * hann(n_burst, sym=True) * np.sin(2.0 * np.pi * carrier_hz * t)

    signal = np.zeros(n_samples, dtype=np.float64)
    onsets = onset_samples(bpm, n_samples, sample_rate)
    for start in onsets:
        stop = min(start + n_burst, n_samples)
        signal[start:stop] += burst[:stop - start]

    if noise_amp > 0:
        rng = np.random.default_rng(seed)
        signal += rng.uniform(-noise_amp, noise_amp, size=n_samples)

    logger.debug("Synthesised %d bursts at %.1f BPM (%.1f s, carrier %.0f Hz).",
                 onsets.size, bpm, duration, carrier_hz)
    return AudioBuffer(samples=signal, sample_rate=sample_rate)


def synth_dataset(
    out_dir: str | Path,
    tempi: Iterable[float],
    seed: int = 0,
    **track_kwargs,
) -> list[GroundTruthEntry]:
    """
    Write one WAV per tempo plus `manifest.csv` into `out_dir`.

    Track i uses seed `seed + i`.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, bpm in enumerate(tempi):
        path = out_dir / f"click_{i:03d}_{bpm:g}bpm.wav"
        write_wav(synth_click_track(bpm, seed=seed + i, **track_kwargs), path)
        entries.append(GroundTruthEntry(audio_path=path, tempo=float(bpm)))
    write_manifest(entries, out_dir / "manifest.csv")
    logger.info("Wrote %d synthetic tracks to %s.", len(entries), out_dir)
    return entries
