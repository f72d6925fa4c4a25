"""
Shared fixtures: seeded RNG, WAV writers and synthetic click tracks.
"""

from pathlib import Path

import numpy as np
import pytest
from scipy.io import wavfile

from evalkit.synth import synth_click_track
from ingest.audio import AudioBuffer, write_wav


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def wav_file(tmp_path):
    """Factory: write raw `data` (any dtype scipy supports) and return the path."""
    def _write(name: str, data: np.ndarray, rate: int = 44100) -> Path:
        path = tmp_path / name
        wavfile.write(path, rate, data)
        return path
    return _write


@pytest.fixture
def click_wav(tmp_path):
    """Factory: write a 16-bit click track at `bpm` and return the path."""
    def _write(bpm: float, duration: float = 10.0, seed: int = 0, name: str | None = None, **kwargs) -> Path:
        path = tmp_path / (name or f"click_{bpm:g}_{seed}.wav")
        write_wav(synth_click_track(bpm, duration=duration, seed=seed, **kwargs), path)
        return path
    return _write


@pytest.fixture
def silence_wav(tmp_path):
    def _write(duration: float = 10.0, rate: int = 44100) -> Path:
        path = tmp_path / "silence.wav"
        write_wav(AudioBuffer(samples=np.zeros(int(duration * rate)), sample_rate=rate), path)
        return path
    return _write
