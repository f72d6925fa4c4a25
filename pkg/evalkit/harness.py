"""
evalkit/harness.py — Dataset evaluation
========================================
Runs the full pipeline on every manifest entry and reports Accuracy 1
and Accuracy 2 as percentages of *all* entries: isolation failures and
unreadable files count as misses in both metrics.

Entries are independent and may be evaluated on a thread pool; the
report always follows manifest order and contains nothing that varies
between runs, so identical inputs give byte-identical JSON.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

from pydantic import BaseModel, Field

from evalkit.dataset import GroundTruthEntry
from evalkit.metrics import accuracy1, accuracy2
from ingest.audio import load_mono
from pipeline.runner import PipelineConfig, TempoPipeline
from utils.errors import IsolationFailure, StbeatError
from utils.logger import get_logger

logger = get_logger("evalkit.harness")


class EvalItem(BaseModel):
    path: str
    truth: float
    estimate: Optional[float] = None
    band_index: Optional[int] = None
    acc1: bool = False
    acc2: bool = False


class EvalFailure(BaseModel):
    path: str
    reason: str


class EvalReport(BaseModel):
    """Aggregate result; accuracies are None for an empty manifest."""
    total: int
    estimated: int
    accuracy1: Optional[float] = Field(None, ge=0.0, le=100.0)
    accuracy2: Optional[float] = Field(None, ge=0.0, le=100.0)
    failures: list[EvalFailure] = Field(default_factory=list)
    per_item: list[EvalItem] = Field(default_factory=list)
    config: PipelineConfig

    def summary(self) -> str:
        if self.total == 0:
            return "0 items, accuracies undefined."
        return (
            f"{self.total} items, {self.estimated} estimated. "
            f"Accuracy 1: {self.accuracy1:.1f}%  Accuracy 2: {self.accuracy2:.1f}%"
        )


def _evaluate_entry(
    entry: GroundTruthEntry,
    pipeline: TempoPipeline,
) -> tuple[EvalItem, EvalFailure | None]:
    path = str(entry.audio_path)
    item = EvalItem(path=path, truth=entry.tempo)
    try:
        estimate = pipeline.analyze(load_mono(entry.audio_path))
    except IsolationFailure:
        return item, EvalFailure(path=path, reason="isolation_failure")
    except (StbeatError, OSError) as exc:
        return item, EvalFailure(path=path, reason=f"{type(exc).__name__}: {exc}")

    item.estimate = estimate.bpm
    item.band_index = estimate.selected_band
    item.acc1 = accuracy1(estimate.bpm, entry.tempo)
    item.acc2 = accuracy2(estimate.bpm, entry.tempo)
    return item, None


def evaluate(
    entries: Sequence[GroundTruthEntry],
    config: PipelineConfig | None = None,
    workers: int = 1,
) -> EvalReport:
    """
    Estimate the tempo of every entry and score it against the truth.

    Parameters
    ----------
    entries : sequence of GroundTruthEntry   Duplicates are scored independently.
    config  : PipelineConfig
    workers : int                            Entries evaluated concurrently.
    """
    config = config or PipelineConfig()
    pipeline = TempoPipeline(config)

    if workers > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda e: _evaluate_entry(e, pipeline), entries))
    else:
        outcomes = [_evaluate_entry(e, pipeline) for e in entries]

    items = [item for item, _ in outcomes]
    failures = [failure for _, failure in outcomes if failure is not None]
    total = len(items)
    estimated = sum(item.estimate is not None for item in items)

    acc1 = acc2 = None
    if total:
        acc1 = 100.0 * sum(item.acc1 for item in items) / total
        acc2 = 100.0 * sum(item.acc2 for item in items) / total

    report = EvalReport(
        total=total,
        estimated=estimated,
        accuracy1=acc1,
        accuracy2=acc2,
        failures=failures,
        per_item=items,
        config=config,
    )
    logger.info(report.summary())
    return report


def write_report_json(report: EvalReport, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.model_dump_json(indent=2))
        fh.write("\n")


def write_report_csv(report: EvalReport, path: str | os.PathLike) -> None:
    """Per-item table: path, truth, estimate, acc1, acc2."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "truth", "estimate", "band", "acc1", "acc2"])
        for item in report.per_item:
            writer.writerow([
                item.path,
                f"{item.truth:g}",
                "" if item.estimate is None else f"{item.estimate:g}",
                "" if item.band_index is None else item.band_index,
                int(item.acc1),
                int(item.acc2),
            ])
