"""
Accuracy metrics, manifests, synthetic click tracks and the evaluation harness.
"""

import csv
import json

import numpy as np
import pytest

from evalkit.dataset import GroundTruthEntry, import_annotated_dir, read_manifest, write_manifest
from evalkit.harness import evaluate, write_report_csv, write_report_json
from evalkit.metrics import accuracy1, accuracy2
from evalkit.synth import onset_samples, synth_click_track, synth_dataset
from ingest.audio import load_mono
from isolation.selector import TempoEstimate
from pipeline.runner import PipelineConfig
from utils.errors import ConfigurationError, IsolationFailure


# ── metrics ──────────────────────────────────────────────────────────────────


@pytest.mark.parametrize("estimate, truth, acc1, acc2", [
    (100, 100, True, True),
    (104, 100, True, True),
    (104.1, 100, False, False),
    (96, 100, True, True),
    (95.9, 100, False, False),
    (200, 100, False, True),
    (50, 100, False, True),
    (300, 100, False, True),
    (33.4, 100, False, True),
    (150, 100, False, False),
    (61, 120, False, True),
])
def test_accuracy_truth_table(estimate, truth, acc1, acc2):
    assert accuracy1(estimate, truth) is acc1
    assert accuracy2(estimate, truth) is acc2


def test_accuracy1_implies_accuracy2(rng):
    for est, truth in rng.uniform(20, 400, size=(500, 2)):
        if accuracy1(est, truth):
            assert accuracy2(est, truth)


def test_accuracy_is_scale_invariant(rng):
    for est, truth, alpha in rng.uniform(0.5, 300, size=(500, 3)):
        assert accuracy1(alpha * est, alpha * truth) == accuracy1(est, truth)
        assert accuracy2(alpha * est, alpha * truth) == accuracy2(est, truth)


# ── synth ────────────────────────────────────────────────────────────────────


def test_click_track_onsets():
    buf = synth_click_track(120, duration=20.0)
    assert len(buf) == 882000
    assert buf.sample_rate == 44100
    onsets = onset_samples(120, len(buf), 44100)
    assert onsets.size == 40
    assert onsets[0] == 0
    np.testing.assert_array_equal(np.diff(onsets), 22050)


def test_click_track_silent_between_bursts():
    buf = synth_click_track(60, duration=3.0, noise_amp=0.0)
    burst = int(round(0.05 * 44100))
    assert np.all(buf.samples[burst:44100] == 0.0)
    assert np.max(np.abs(buf.samples[:burst])) > 0.5


def test_click_track_deterministic():
    a = synth_click_track(97, duration=2.0, seed=3)
    b = synth_click_track(97, duration=2.0, seed=3)
    c = synth_click_track(97, duration=2.0, seed=4)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


@pytest.mark.parametrize("kwargs", [
    {"bpm": 29},
    {"bpm": 301},
    {"bpm": 120, "carrier_hz": 20},
    {"bpm": 120, "duration": 0},
    {"bpm": 120, "noise_amp": -0.1},
    {"bpm": 120, "amplitude": 0.99, "noise_amp": 0.05},
])
def test_click_track_rejects_bad_settings(kwargs):
    with pytest.raises(ConfigurationError):
        synth_click_track(**kwargs)


def test_synth_dataset_writes_manifest(tmp_path):
    entries = synth_dataset(tmp_path, [100, 140], seed=5, duration=1.0)
    assert [e.tempo for e in entries] == [100.0, 140.0]
    assert all(e.audio_path.exists() for e in entries)
    assert read_manifest(tmp_path / "manifest.csv") == entries
    assert len(load_mono(entries[0].audio_path)) == 44100


# ── manifests ────────────────────────────────────────────────────────────────


def test_read_manifest(tmp_path):
    (tmp_path / "m.csv").write_text(
        "# tempo set\n"
        "path,bpm\n"
        "a.wav,120\n"
        "\n"
        "sub/b.wav, 88.5\n"
        "/abs/c.wav,60\n",
        encoding="utf-8",
    )
    entries = read_manifest(tmp_path / "m.csv")
    assert [e.tempo for e in entries] == [120.0, 88.5, 60.0]
    assert entries[0].audio_path == tmp_path / "a.wav"
    assert entries[1].audio_path == tmp_path / "sub" / "b.wav"
    assert str(entries[2].audio_path) == "/abs/c.wav"


def test_read_manifest_without_header_keeps_duplicates(tmp_path):
    (tmp_path / "m.csv").write_text("a.wav,120\na.wav,120\n", encoding="utf-8")
    assert len(read_manifest(tmp_path / "m.csv")) == 2


@pytest.mark.parametrize("body", ["a.wav,120\nb.wav,fast\n", "a.wav\n", "a.wav,-5\n"])
def test_read_manifest_rejects_malformed_rows(tmp_path, body):
    (tmp_path / "m.csv").write_text(body, encoding="utf-8")
    with pytest.raises(ConfigurationError):
        read_manifest(tmp_path / "m.csv")


def test_read_manifest_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_manifest(tmp_path / "none.csv")


def test_write_then_read_manifest(tmp_path):
    entries = [GroundTruthEntry(audio_path=tmp_path / "x.wav", tempo=123.5)]
    write_manifest(entries, tmp_path / "out.csv")
    assert read_manifest(tmp_path / "out.csv") == entries


def test_import_annotated_dir(tmp_path):
    audio, ann = tmp_path / "audio" / "ChaChaCha", tmp_path / "annotations"
    audio.mkdir(parents=True)
    ann.mkdir()
    for name in ("track1", "track2", "orphan"):
        (audio / f"{name}.wav").write_bytes(b"")
    (ann / "track1.bpm").write_text("124\n")
    (ann / "track2.bpm").write_text("  96.5 ")
    entries = import_annotated_dir(tmp_path / "audio", ann)
    assert [(e.audio_path.name, e.tempo) for e in entries] == [("track1.wav", 124.0), ("track2.wav", 96.5)]


# ── harness ──────────────────────────────────────────────────────────────────


def _fake_estimate(bpm):
    return TempoEstimate(selected_band=2, score=1.0, best_gaps=np.array([1.0]), bpm=bpm,
                         effective_rate=1102.5, isolation_set=[2], scores=[0.0, 1.0])


def test_evaluate_accounting(monkeypatch, tmp_path):
    answers = {"a.wav": 100.0, "b.wav": 200.0, "c.wav": None}

    def fake_analyze(self, buf):
        bpm = answers[buf]
        if bpm is None:
            raise IsolationFailure(scores=[0.1, 0.2], degenerate_bands=[], epsilon=1e-3)
        return _fake_estimate(bpm)

    monkeypatch.setattr("evalkit.harness.load_mono", lambda path: path.name)
    monkeypatch.setattr("evalkit.harness.TempoPipeline.analyze", fake_analyze)

    entries = [GroundTruthEntry(audio_path=tmp_path / name, tempo=100.0) for name in answers]
    report = evaluate(entries)
    assert report.total == 3
    assert report.estimated == 2
    assert report.accuracy1 == pytest.approx(100 / 3)
    assert report.accuracy2 == pytest.approx(200 / 3)
    assert [f.reason for f in report.failures] == ["isolation_failure"]
    assert report.per_item[1].estimate == 200.0 and report.per_item[1].acc2


def test_evaluate_empty_manifest():
    report = evaluate([])
    assert report.total == 0
    assert report.accuracy1 is None and report.accuracy2 is None
    assert json.loads(report.model_dump_json())["accuracy1"] is None


def test_evaluate_synthetic_set(tmp_path, silence_wav):
    entries = synth_dataset(tmp_path / "set", [120, 90], duration=8.0)
    entries.append(GroundTruthEntry(audio_path=silence_wav(duration=8.0), tempo=100.0))
    entries.append(GroundTruthEntry(audio_path=tmp_path / "missing.wav", tempo=100.0))

    report = evaluate(entries, PipelineConfig(), workers=2)
    assert report.total == 4
    assert report.estimated == 2
    assert report.accuracy1 == 50.0
    reasons = [f.reason for f in report.failures]
    assert reasons[0] == "isolation_failure"
    assert reasons[1].startswith("AudioReadError")

    again = evaluate(entries, PipelineConfig(), workers=1)
    assert again.model_dump_json() == report.model_dump_json()

    write_report_json(report, tmp_path / "report.json")
    assert json.loads((tmp_path / "report.json").read_text())["total"] == 4
    write_report_csv(report, tmp_path / "items.csv")
    with open(tmp_path / "items.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["path", "truth", "estimate", "band", "acc1", "acc2"]
    assert len(rows) == 5
    assert rows[3][2] == ""


@pytest.mark.slow
def test_synthetic_dataset_accuracy(tmp_path):
    tempi = [60, 75, 90, 100, 110, 120, 128, 140, 160, 180]
    entries = synth_dataset(tmp_path, tempi, seed=11, duration=20.0)
    report = evaluate(entries, workers=2)
    assert report.accuracy1 >= 90.0
