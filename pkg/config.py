"""
config.py — Centralised configuration & hyper-parameters
=========================================================
Every tunable constant in the project lives here so that the rest of the
codebase can import from a single source of truth.

Defaults are the reference parameter set for 44.1 kHz excerpts:
D=40, Q=10 (K derived, 1103 for a 20 s excerpt), n_p=40, H=100, ε=1e-3.
"""

import os

# ─── Downsampling / Grid ─────────────────────────────────────────────────────
# D must be a positive even integer.  At 44.1 kHz, D=40 gives an effective
# rate of 1102.5 Hz, just above the 1024 Hz needed for rhythm instruments.
DOWNSAMPLE_FACTOR: int = 40
SUBBAND_COUNT: int = 10            # Q
SUBBAND_SIZE: int | None = None    # K; None → derived so that 2QK fills the excerpt

# Rhythm instruments typically live between 32 Hz and 512 Hz.
RHYTHM_BAND_HZ: tuple[float, float] = (32.0, 512.0)
MIN_EFFECTIVE_RATE_HZ: float = 1024.0   # below this the rhythm band aliases

# Rule of thumb for choosing K: subbands roughly 50 Hz wide.
SUGGESTED_BAND_WIDTH_HZ: float = 50.0

# ─── S-Transform ─────────────────────────────────────────────────────────────
# Frequency rows are evaluated in blocks of this many rows; one block costs
# ST_ROW_BLOCK × M complex values of memory.
ST_ROW_BLOCK: int = 128

# Voice-window weights below this are treated as exactly zero.
ST_WINDOW_FLOOR: float = 1e-16

# ─── Envelope Isolation ──────────────────────────────────────────────────────
PEAK_SEPARATION: int = 40          # n_p, samples between upper-envelope knots
THRESHOLD_STEPS: int = 100         # H
ISOLATION_EPSILON: float = 1e-3    # ε, |1 − b_i| ≤ ε puts band i in I*
MIN_RUNS: int = 3                  # fewer runs than this → score 0

# ─── Evaluation ──────────────────────────────────────────────────────────────
ACCURACY_TOLERANCE: float = 0.04
# Accuracy 2 also accepts a third, half, double and triple of the truth.
ACCURACY2_FACTORS: tuple[float, ...] = (1.0 / 3.0, 0.5, 1.0, 2.0, 3.0)

# ─── Synthetic Click Tracks ──────────────────────────────────────────────────
SYNTH_SAMPLE_RATE: int = 44100
SYNTH_BURST_SECONDS: float = 0.05   # raised-cosine burst length
SYNTH_AMPLITUDE: float = 0.8        # burst peak amplitude
SYNTH_BPM_RANGE: tuple[float, float] = (30.0, 300.0)
SYNTH_CARRIER_HZ: float = 60.0
SYNTH_DURATION_SECONDS: float = 20.0
SYNTH_NOISE_AMP: float = 0.05

# ─── Runtime ─────────────────────────────────────────────────────────────────
THREADS_ENV_VAR = "STBEAT_THREADS"
LOG_LEVEL_ENV_VAR = "STBEAT_LOG_LEVEL"

# ─── API ─────────────────────────────────────────────────────────────────────
API_TITLE = "S-Transform Tempo Estimation API"
API_VERSION = "0.1.0"


def worker_count() -> int:
    """
    Number of worker threads to use, capped by ``STBEAT_THREADS``.

    Read on every call so tests and long-running servers see changes to
    the environment.  Unset, unparsable or non-positive values fall back
    to the CPU count.
    """
    cpus = os.cpu_count() or 1
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if not raw:
        return cpus
    try:
        cap = int(raw)
    except ValueError:
        return cpus
    if cap < 1:
        return cpus
    return cap
