"""
utils/errors.py — Exception hierarchy
======================================
Value problems subclass `ValueError` and I/O problems subclass `OSError`,
so callers that already catch the built-ins keep working.  Everything
also derives from `StbeatError`, which the CLI maps to exit codes.
"""


class StbeatError(Exception):
    """Base class for every error raised by this project."""


class ConfigurationError(StbeatError, ValueError):
    """A parameter (D, K, Q, n_p, H, ε, synth settings…) is out of range."""


class AudioReadError(StbeatError, OSError):
    """The audio file could not be opened or read."""


class AudioDecodeError(StbeatError, ValueError):
    """The file is not a well-formed RIFF/WAV stream."""


class UnsupportedEncodingError(AudioDecodeError):
    """WAV encoding other than 16-bit PCM / 32-bit float, or > 2 channels."""


class EmptyAudioError(AudioDecodeError):
    """The WAV file holds no samples."""


class SignalValidationError(StbeatError, ValueError):
    """A signal contains NaN or Inf values."""


class InsufficientAudioError(StbeatError, ValueError):
    """Too few samples to fill the 2QK analysis grid."""

    def __init__(self, required: int, actual: int):
        self.required = required
        self.actual = actual
        super().__init__(
            f"Insufficient audio: need at least {required} samples, got {actual}."
        )


class DegenerateEnvelopeError(StbeatError, ValueError):
    """An onset envelope is identically zero and cannot be normalised."""


class NoPeriodError(StbeatError, ValueError):
    """A cluster analysis holds no gaps, so no period can be derived."""


class IsolationFailure(StbeatError, RuntimeError):
    """
    No subband scored within ε of a perfectly periodic onset pattern.

    Attributes
    ----------
    scores           : list[float]  b_i for every band, band 1 first.
    degenerate_bands : list[int]    1-based indices of all-zero bands.
    epsilon          : float        Isolation accuracy used.
    """

    def __init__(self, scores: list[float], degenerate_bands: list[int], epsilon: float):
        self.scores = list(scores)
        self.degenerate_bands = list(degenerate_bands)
        self.epsilon = epsilon
        best = max(self.scores) if self.scores else 0.0
        super().__init__(
            f"Isolation failure: no band within ε={epsilon:g} of 1 "
            f"(best score {best:.6f} over {len(self.scores)} bands)."
        )

    def to_dict(self) -> dict:
        return {
            "error": "isolation_failure",
            "scores": self.scores,
            "degenerate_bands": self.degenerate_bands,
            "epsilon": self.epsilon,
        }
