"""
evalkit/metrics.py — Tempo accuracy metrics
============================================
    Accuracy 1 : estimate within 4 % of the ground-truth tempo.
    Accuracy 2 : estimate within 4 % of the truth or of a third, half,
                 double or triple of it (octave-style errors forgiven).

Both are scored per item; the harness turns them into percentages.
"""

from config import ACCURACY2_FACTORS, ACCURACY_TOLERANCE


def accuracy1(estimate: float, truth: float, tolerance: float = ACCURACY_TOLERANCE) -> bool:
    """True iff |estimate − truth| ≤ tolerance · truth."""
    return abs(estimate - truth) <= tolerance * truth


def accuracy2(
    estimate: float,
    truth: float,
    tolerance: float = ACCURACY_TOLERANCE,
    factors: tuple[float, ...] = ACCURACY2_FACTORS,
) -> bool:
    """True iff `estimate` passes Accuracy 1 against some factor · truth."""
    return any(accuracy1(estimate, f * truth, tolerance) for f in factors)
