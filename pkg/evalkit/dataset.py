"""
evalkit/dataset.py — Ground-truth manifests
============================================
The harness reads a two-column CSV manifest, ``path,bpm`` (UTF-8,
header optional, relative paths resolved against the manifest's
directory, blank lines and ``#`` comments ignored).

Datasets distributed as one ``<track>.bpm`` annotation file per audio
file (the Ballroom and Songs tempo sets) are converted with
`import_annotated_dir`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from utils.errors import ConfigurationError
from utils.logger import get_logger

logger = get_logger("evalkit.dataset")


@dataclass(frozen=True)
class GroundTruthEntry:
    """One audio file and its annotated tempo (BPM)."""
    audio_path: Path
    tempo: float

    def __post_init__(self):
        if not self.tempo > 0:
            raise ConfigurationError(f"Ground-truth tempo must be positive, got {self.tempo} for {self.audio_path}.")
        object.__setattr__(self, "audio_path", Path(self.audio_path))


def _parse_tempo(text: str) -> float | None:
    try:
        return float(text.strip())
    except ValueError:
        return None


def read_manifest(path: str | Path) -> list[GroundTruthEntry]:
    """
    Parse a ``path,bpm`` manifest.

    Raises
    ------
    FileNotFoundError
        If the manifest does not exist.
    ConfigurationError
        On a malformed data row.
    """
    path = Path(path)
    base = path.parent
    entries: list[GroundTruthEntry] = []
    first_row = True
    with open(path, encoding="utf-8-sig", newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            is_first, first_row = first_row, False
            if len(row) < 2:
                raise ConfigurationError(f"{path}:{line_no}: expected 'path,bpm', got {row!r}.")
            tempo = _parse_tempo(row[1])
            if tempo is None:
                if is_first:
                    continue    # header
                raise ConfigurationError(f"{path}:{line_no}: tempo {row[1]!r} is not a number.")
            audio = Path(row[0].strip())
            if not audio.is_absolute():
                audio = base / audio
            entries.append(GroundTruthEntry(audio_path=audio, tempo=tempo))
    logger.info("Read %d entries from %s.", len(entries), path)
    return entries


def write_manifest(entries: Iterable[GroundTruthEntry], path: str | Path) -> None:
    """Write entries as ``path,bpm`` with a header row."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "bpm"])
        for entry in entries:
            writer.writerow([str(entry.audio_path), f"{entry.tempo:g}"])


def _read_bpm_file(path: Path) -> float | None:
    for token in path.read_text(encoding="utf-8", errors="replace").split():
        tempo = _parse_tempo(token)
        if tempo is not None and tempo > 0:
            return tempo
    return None


def import_annotated_dir(
    audio_dir: str | Path,
    annotation_dir: str | Path | None = None,
    pattern: str = "*.wav",
) -> list[GroundTruthEntry]:
    """
    Pair every audio file with its ``<stem>.bpm`` annotation.

    Parameters
    ----------
    audio_dir      : directory searched recursively for `pattern`.
    annotation_dir : directory searched recursively for ``*.bpm`` (default: `audio_dir`).

    Tracks without a readable annotation are skipped with a warning.
    """
    audio_dir = Path(audio_dir)
    annotation_dir = Path(annotation_dir) if annotation_dir is not None else audio_dir
    annotations = {p.stem: p for p in sorted(annotation_dir.rglob("*.bpm"))}

    entries: list[GroundTruthEntry] = []
    for audio in sorted(audio_dir.rglob(pattern)):
        ann = annotations.get(audio.stem)
        tempo = _read_bpm_file(ann) if ann is not None else None
        if tempo is None:
            logger.warning("No tempo annotation for %s, skipped.", audio.name)
            continue
        entries.append(GroundTruthEntry(audio_path=audio, tempo=tempo))
    logger.info("Imported %d annotated tracks from %s.", len(entries), audio_dir)
    return entries
