"""
Envelope preconditioning, threshold clustering and beat-band isolation.
"""

import dataclasses
import json

import numpy as np
import pytest

from envelopes.bands import OnsetEnvelope
from isolation.clustering import (
    ClusterAnalysis,
    clusters_at_threshold,
    regularity_score,
    score_band,
    threshold_levels,
)
from isolation.precondition import center_rectify, find_peaks, normalize, precondition, upper_envelope
from isolation.selector import (
    IsolationParams,
    bpm_estimate,
    isolate,
    isolation_set,
    score_envelopes,
    select_band,
    write_diagnostics_json,
)
from utils.errors import ConfigurationError, DegenerateEnvelopeError, IsolationFailure, NoPeriodError

RATE = 1102.5


def greedy_peaks(x, n_p):
    cand = [k for k in range(1, len(x) - 1) if x[k - 1] < x[k] > x[k + 1]]
    kept = []
    for k in sorted(cand, key=lambda k: (-x[k], k)):
        if all(abs(k - j) >= n_p for j in kept):
            kept.append(k)
    return sorted(kept)


def natural_spline(knots, values, t):
    """Natural cubic spline from its tridiagonal second-derivative system."""
    n = len(knots)
    h = np.diff(knots).astype(np.float64)
    a = np.zeros((n, n))
    rhs = np.zeros(n)
    a[0, 0] = a[-1, -1] = 1.0
    for i in range(1, n - 1):
        a[i, i - 1] = h[i - 1]
        a[i, i] = 2 * (h[i - 1] + h[i])
        a[i, i + 1] = h[i]
        rhs[i] = 6 * ((values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1])
    m2 = np.linalg.solve(a, rhs)
    out = np.empty(t.size)
    for idx, x in enumerate(t):
        i = min(np.searchsorted(knots, x, side="right") - 1, n - 2)
        hi = h[i]
        left, right = knots[i + 1] - x, x - knots[i]
        out[idx] = (m2[i] * left ** 3 + m2[i + 1] * right ** 3) / (6 * hi) \
            + (values[i] / hi - m2[i] * hi / 6) * left \
            + (values[i + 1] / hi - m2[i + 1] * hi / 6) * right
    return out


def pulse_train(period, n_pulses=10, sigma=3.0, noise=0.1, seed=0, start=100):
    """Gaussian pulses every `period` samples on top of non-negative uniform noise."""
    m_len = start + (n_pulses - 1) * period + 2 * start
    n = np.arange(m_len)
    r = np.zeros(m_len)
    for k in range(n_pulses):
        r += np.exp(-((n - (start + k * period)) ** 2) / (2 * sigma ** 2))
    return r + np.random.default_rng(seed).uniform(0.0, noise, m_len)


def triangle_clusters(centers, heights, width, length):
    r = np.zeros(length)
    for c, h in zip(centers, heights):
        for x in range(-width, width + 1):
            r[c + x] = max(r[c + x], h * (1 - abs(x) / (width + 1)))
    return r


# ── normalize / peaks / upper envelope ──────────────────────────────────────


def test_normalize():
    np.testing.assert_array_equal(normalize(np.array([1.0, 4.0, 2.0])), [0.25, 1.0, 0.5])
    with pytest.raises(DegenerateEnvelopeError):
        normalize(np.zeros(5))


def test_find_peaks_strict_and_separated():
    x = np.array([0, 1, 0, 1, 0], dtype=float)
    np.testing.assert_array_equal(find_peaks(x, 1), [1, 3])
    np.testing.assert_array_equal(find_peaks(x, 3), [1])
    # plateau is not a strict maximum
    np.testing.assert_array_equal(find_peaks(np.array([0, 2, 2, 0.0]), 1), [])
    assert find_peaks(np.array([1.0, 2.0]), 1).size == 0


def test_find_peaks_matches_greedy_suppression(rng):
    for _ in range(200):
        x = rng.integers(0, 6, size=int(rng.integers(3, 60))).astype(float)
        n_p = int(rng.integers(1, 8))
        got = find_peaks(x, n_p).tolist()
        assert got == greedy_peaks(x, n_p)
        assert all(b - a >= n_p for a, b in zip(got, got[1:]))


def test_find_peaks_rejects_bad_separation():
    with pytest.raises(ConfigurationError):
        find_peaks(np.zeros(10), 0)


def test_upper_envelope_passes_through_knots():
    x = np.array([0, 1, 0, 1, 0], dtype=float)
    u = upper_envelope(x, np.array([1, 3]))
    np.testing.assert_array_equal(u[[0, 1, 3, 4]], [0, 1, 1, 0])


def test_upper_envelope_matches_tridiagonal_solve(rng):
    x = rng.uniform(0, 1, size=200)
    peaks = find_peaks(x, 15)
    knots = np.concatenate(([0], peaks, [199]))
    expected = natural_spline(knots, x[knots], np.arange(200.0))
    np.testing.assert_allclose(upper_envelope(x, peaks), expected, atol=1e-9)


def test_upper_envelope_constant_and_short():
    np.testing.assert_allclose(upper_envelope(np.full(30, 0.7), np.array([], dtype=int)), 0.7)
    with pytest.raises(ConfigurationError):
        upper_envelope(np.array([1.0]), np.array([], dtype=int))


def test_center_rectify():
    out = center_rectify(np.array([0.2, 0.8, 0.5]), np.full(3, 0.5))
    np.testing.assert_allclose(out, [0.0, 0.3, 0.0])
    with pytest.raises(ConfigurationError):
        center_rectify(np.zeros(3), np.zeros(4))


def test_precondition_is_scale_invariant(rng):
    r = rng.uniform(0, 1, size=500)
    a, b = precondition(r, 40), precondition(8.0 * r, 40)
    np.testing.assert_array_equal(a.centered, b.centered)
    assert np.all(a.centered >= 0)
    assert a.level == pytest.approx(a.upper.mean())


# ── clustering ───────────────────────────────────────────────────────────────


def test_three_cluster_example():
    r_hat = np.zeros(40)
    r_hat[8:12] = r_hat[19:21] = r_hat[28:31] = 1.0
    res = clusters_at_threshold(r_hat, 0.5)
    assert [run.tolist() for run in res.runs] == [[8, 9, 10, 11], [19, 20], [28, 29, 30]]
    np.testing.assert_array_equal(res.centroids, [9.5, 19.5, 29.0])
    np.testing.assert_array_equal(res.gaps, [10.0, 9.5])
    assert res.score == pytest.approx(19.5 / (np.sqrt(2) * np.hypot(10.0, 9.5)), abs=1e-12)
    assert res.score == pytest.approx(0.99969, abs=1e-4)


def test_equal_gaps_score_one():
    assert regularity_score(np.array([7.0, 7.0, 7.0])) == pytest.approx(1.0, abs=1e-12)


def test_too_few_runs_score_zero():
    r_hat = np.zeros(30)
    r_hat[5] = r_hat[20] = 1.0
    assert clusters_at_threshold(r_hat, 0.5).score == 0.0
    assert regularity_score(np.array([3.0, 3.0, 3.0]), min_runs=5) == 0.0
    assert clusters_at_threshold(np.zeros(10), 0.5).n_runs == 0


def test_runs_partition_supra_threshold_set(rng):
    for _ in range(100):
        r_hat = np.maximum(0, rng.normal(size=int(rng.integers(1, 80))))
        h = float(rng.uniform(0, 1))
        res = clusters_at_threshold(r_hat, h)
        naive, current = [], []
        for k, v in enumerate(r_hat):
            if v >= h:
                if current and current[-1] != k - 1:
                    naive.append(current)
                    current = []
                current.append(k)
        if current:
            naive.append(current)
        assert [run.tolist() for run in res.runs] == naive


def test_supra_threshold_count_is_monotone(rng):
    r_hat = np.maximum(0, rng.normal(size=300))
    levels = threshold_levels(float(r_hat.max()), 100)
    counts = [sum(run.size for run in clusters_at_threshold(r_hat, h).runs) for h in levels]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_score_band_trace_and_scale_invariance(rng):
    r_hat = np.maximum(0, rng.normal(size=400))
    a, b = score_band(r_hat, 100), score_band(4.0 * r_hat, 100)
    assert a.trace.shape == (100,)
    assert a.trace[0] == 0.0
    np.testing.assert_array_equal(a.trace, b.trace)
    assert a.b == b.b and a.best_threshold == b.best_threshold
    assert 0.0 <= a.b <= 1.0


def test_score_band_all_zero():
    res = score_band(np.zeros(50), 10)
    assert res.b == 0.0
    with pytest.raises(ConfigurationError):
        score_band(np.ones(5), 1)


def test_jitter_breaks_regularity(rng):
    """Three symmetric clusters: equal spacing scores 1, a 5% shift of the middle one does not."""
    for _ in range(50):
        t = int(rng.integers(2, 11))
        gap = 20 * t
        c0 = int(rng.integers(20, 50))
        width = int(rng.integers(1, min(5, gap // 2 - t - 1) + 1))
        heights = rng.uniform(0.5, 1.0, size=3)
        length = c0 + 2 * gap + 40

        even = triangle_clusters([c0, c0 + gap, c0 + 2 * gap], heights, width, length)
        assert score_band(even, 100).b == pytest.approx(1.0, abs=1e-12)

        shifted = triangle_clusters([c0, c0 + gap + t, c0 + 2 * gap], heights, width, length)
        assert score_band(shifted, 100).b < 1.0 - 1e-3


# ── selection & BPM ──────────────────────────────────────────────────────────


def test_isolation_set_and_selection():
    scores = [0.5] * 9 + [0.999895]
    assert isolation_set(scores, 1e-3) == [10]
    assert select_band(scores, 1e-3) == ([10], 10)
    assert select_band([0.9995, 0.9999, 0.9999], 1e-3) == ([1, 2, 3], 2)
    with pytest.raises(IsolationFailure) as info:
        select_band([0.9, 0.95], 1e-3)
    assert info.value.scores == [0.9, 0.95]


def _analysis(gaps):
    return ClusterAnalysis(threshold=0.0, bounds=np.empty((0, 2)), centroids=np.empty(0),
                           gaps=np.asarray(gaps, dtype=float), score=1.0)


def test_bpm_from_mean_gap():
    assert bpm_estimate(_analysis([551.25, 551.25]), RATE) == 120
    assert bpm_estimate(_analysis([10.0, 9.5]), RATE) == 6785
    with pytest.raises(NoPeriodError):
        bpm_estimate(_analysis([]), RATE)


@pytest.mark.parametrize("period", [300, 550, 750, 1100])
def test_recovers_pulse_period(period):
    env = OnsetEnvelope(values=pulse_train(period, seed=period), band_index=1, effective_rate=RATE)
    est = isolate([env])
    assert est.selected_band == 1
    assert est.score >= 1 - 1e-3
    assert abs(est.bpm - 60 * RATE / period) <= 1


def test_selects_periodic_band_among_noise(rng):
    envs = [OnsetEnvelope(values=pulse_train(550, seed=1), band_index=1, effective_rate=RATE)]
    envs += [OnsetEnvelope(values=rng.uniform(0, 1, 5500), band_index=i + 2, effective_rate=RATE)
             for i in range(3)]
    est = isolate(envs)
    assert est.selected_band == 1
    assert est.bpm == 120
    assert len(est.scores) == 4


@pytest.mark.slow
def test_white_noise_fails_isolation():
    """Ten uniform-noise bands of a full-length grid (2 · 10 · 1102 bins), default parameters."""
    params = IsolationParams()
    failures = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        envs = [OnsetEnvelope(values=rng.uniform(0, 1, 22040), band_index=i + 1, effective_rate=RATE)
                for i in range(10)]
        try:
            isolate(envs, params)
        except IsolationFailure:
            failures += 1
    assert failures >= 99


def test_band_result_keeps_only_the_score():
    env = OnsetEnvelope(values=pulse_train(300, seed=2), band_index=3, effective_rate=RATE)
    (result,) = score_envelopes([env], IsolationParams())
    assert [f.name for f in dataclasses.fields(result)] == ["band_index", "score"]
    assert result.band_index == 3
    assert result.b >= 1 - 1e-3


def test_degenerate_bands_reported():
    envs = [OnsetEnvelope(values=np.zeros(100), band_index=i + 1) for i in range(2)]
    with pytest.raises(IsolationFailure) as info:
        isolate(envs)
    payload = info.value.to_dict()
    assert payload["error"] == "isolation_failure"
    assert payload["scores"] == [0.0, 0.0]
    assert payload["degenerate_bands"] == [1, 2]


def test_threaded_scoring_keeps_band_order(rng):
    envs = [OnsetEnvelope(values=rng.uniform(0, 1, 300), band_index=i + 1) for i in range(6)]
    params = IsolationParams()
    serial = score_envelopes(envs, params, workers=1)
    threaded = score_envelopes(envs, params, workers=4)
    assert [r.band_index for r in threaded] == list(range(1, 7))
    assert [r.b for r in threaded] == [r.b for r in serial]


def test_params_validation():
    with pytest.raises(ConfigurationError):
        IsolationParams(epsilon=0.0)
    with pytest.raises(ConfigurationError):
        IsolationParams(threshold_steps=1)
    with pytest.raises(ConfigurationError):
        IsolationParams(peak_separation=0)


def test_diagnostics_json(tmp_path):
    envs = [OnsetEnvelope(values=pulse_train(550), band_index=1, effective_rate=RATE),
            OnsetEnvelope(values=np.zeros(5500), band_index=2, effective_rate=RATE)]
    results = score_envelopes(envs, IsolationParams(), workers=1)
    path = tmp_path / "diag.json"
    write_diagnostics_json(results, path)
    bands = json.loads(path.read_text())["bands"]
    assert [b["band"] for b in bands] == [1, 2]
    assert len(bands[0]["trace"]) == 100
    assert bands[1]["degenerate"] is True
