#!/usr/bin/env python3
"""
cli.py — stbeat command-line interface
=======================================
Runs the tempo pipeline without the HTTP server.

Usage:
    python cli.py analyze track.wav [--d 40 --q 10 --np 40 --thresholds 100 --epsilon 1e-3]
    python cli.py envelopes track.wav --out envelopes.csv
    python cli.py evaluate manifest.csv --out report.json [--csv items.csv --workers 4]
    python cli.py evaluate --audio ballroom/wav --annotations ballroom/bpm --save-manifest m.csv
    python cli.py synth --bpm 120 --duration 20 --carrier 60 --out click.wav --seed 0

JSON goes to stdout, human-readable summaries and logs to stderr.

Exit codes
----------
    0  success
    1  usage, I/O or configuration error
    2  isolation failure (no band regular enough)
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from config import (
    SYNTH_CARRIER_HZ,
    SYNTH_DURATION_SECONDS,
    SYNTH_NOISE_AMP,
    SYNTH_SAMPLE_RATE,
    worker_count,
)
from envelopes.bands import write_envelopes_csv
from evalkit.dataset import import_annotated_dir, read_manifest, write_manifest
from evalkit.harness import evaluate, write_report_csv, write_report_json
from evalkit.synth import synth_click_track
from ingest.audio import load_mono, write_wav
from isolation.selector import write_diagnostics_json
from pipeline.runner import PipelineConfig, TempoPipeline
from tfr.stransform import write_matrix_csv
from utils.errors import ConfigurationError, IsolationFailure, StbeatError
from utils.logger import get_logger, set_level

logger = get_logger("cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ISOLATION_FAILURE = 2


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; our contract reserves 2 for isolation failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def pretty_print(label: str, value, unit: str = "") -> None:
    """Colourised summary line on stderr."""
    if sys.stderr.isatty():
        print(f"  \033[1;36m{label:<22}\033[0m \033[1;33m{value}\033[0m {unit}", file=sys.stderr)
    else:
        print(f"  {label:<22} {value} {unit}", file=sys.stderr)


def _emit_json(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline")
    g.add_argument("--d", type=int, default=None, help="Downsampling factor D (even, default 40)")
    g.add_argument("--k", type=int, default=None, help="Subband size K (default: derived, M/(2Q))")
    g.add_argument("--q", type=int, default=None, help="Subband count Q (default 10)")
    g.add_argument("--np", dest="n_p", type=int, default=None, help="Peak separation n_p (default 40)")
    g.add_argument("--thresholds", type=int, default=None, help="Threshold steps H (default 100)")
    g.add_argument("--epsilon", type=float, default=None, help="Isolation accuracy ε (default 1e-3)")
    g.add_argument("--min-runs", type=int, default=None, help="Runs needed for a nonzero score (default 3)")
    g.add_argument("--offset", type=float, default=None, help="Excerpt start (s)")
    g.add_argument("--window", type=float, default=None, help="Excerpt length (s); default: whole file")


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig.create(
        downsample_factor=args.d,
        subband_size=args.k,
        subband_count=args.q,
        peak_separation=args.n_p,
        threshold_steps=args.thresholds,
        epsilon=args.epsilon,
        min_runs=args.min_runs,
        offset_seconds=args.offset,
        window_seconds=args.window,
    )


# ── Commands ─────────────────────────────────────────────────────────────────


def cmd_analyze(args: argparse.Namespace) -> int:
    """Estimate the tempo of one file and print it as JSON."""
    pipeline = TempoPipeline(_config_from_args(args))
    run = pipeline.run(load_mono(args.path))

    if args.matrix:
        write_matrix_csv(run.st, args.matrix)
    if args.diagnostics:
        write_diagnostics_json(run.band_results, args.diagnostics)

    try:
        estimate = pipeline.estimate(run)
    except IsolationFailure as exc:
        _emit_json(exc.to_dict())
        print(f"  {exc}", file=sys.stderr)
        return EXIT_ISOLATION_FAILURE

    _emit_json(estimate.to_dict())
    pretty_print("Tempo", f"{estimate.bpm:.0f}", "BPM")
    pretty_print("Selected band", estimate.selected_band)
    pretty_print("Score b", f"{estimate.score:.6f}")
    pretty_print("Isolation set", estimate.isolation_set)
    return EXIT_OK


def cmd_envelopes(args: argparse.Namespace) -> int:
    """Write the Q onset envelopes (M rows × Q columns) to CSV."""
    pipeline = TempoPipeline(_config_from_args(args))
    run = pipeline.envelopes(load_mono(args.path))
    write_envelopes_csv(run.envelopes, run.subbands.band_edges, args.out)
    pretty_print("Envelopes", f"{len(run.envelopes)} × {run.grid.grid_length}", f"→ {args.out}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    """Run the manifest through the pipeline and write the accuracy report."""
    if args.manifest is not None and args.audio is not None:
        raise ConfigurationError("Give either a manifest or --audio, not both.")
    if args.audio is not None:
        entries = import_annotated_dir(args.audio, args.annotations)
        if args.save_manifest:
            write_manifest(entries, args.save_manifest)
    elif args.manifest is not None:
        entries = read_manifest(args.manifest)
    else:
        raise ConfigurationError("evaluate needs a manifest or an --audio directory.")

    workers = max(1, min(args.workers, worker_count()))
    if workers != args.workers:
        logger.info("Using %d workers (requested %d).", workers, args.workers)
    report = evaluate(entries, _config_from_args(args), workers=workers)
    if args.out:
        write_report_json(report, args.out)
    else:
        sys.stdout.write(report.model_dump_json(indent=2) + "\n")
    if args.csv:
        write_report_csv(report, args.csv)
    print(f"  {report.summary()}", file=sys.stderr)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    """Write a synthetic 16-bit mono click track."""
    buf = synth_click_track(
        bpm=args.bpm,
        duration=args.duration,
        carrier_hz=args.carrier,
        sample_rate=SYNTH_SAMPLE_RATE,
        noise_amp=args.noise,
        seed=args.seed,
    )
    write_wav(buf, args.out)
    pretty_print("Synthesised", f"{args.bpm:g} BPM, {len(buf)} samples", f"→ {args.out}")
    return EXIT_OK


# ── Entry point ──────────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="stbeat", description="S-transform tempo estimation")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("analyze", help="Estimate the tempo of one WAV file")
    p.add_argument("path", type=Path)
    _add_pipeline_flags(p)
    p.add_argument("--diagnostics", type=Path, help="Write per-band scores/traces as JSON")
    p.add_argument("--matrix", type=Path, help="Write the |S| matrix as CSV (large!)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("envelopes", help="Dump the subband onset envelopes as CSV")
    p.add_argument("path", type=Path)
    _add_pipeline_flags(p)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_envelopes)

    p = sub.add_parser("evaluate", help="Score a path,bpm manifest or an annotated directory (Accuracy 1/2)")
    p.add_argument("manifest", type=Path, nargs="?", help="path,bpm CSV")
    p.add_argument("--audio", type=Path, help="Audio directory with <stem>.bpm annotations (Ballroom/Songs layout)")
    p.add_argument("--annotations", type=Path, help="Separate directory holding the .bpm files")
    p.add_argument("--save-manifest", type=Path, help="Write the imported entries as a path,bpm manifest")
    _add_pipeline_flags(p)
    p.add_argument("--out", type=Path, help="JSON report path (default: stdout)")
    p.add_argument("--csv", type=Path, help="Per-item CSV table")
    p.add_argument("--workers", type=int, default=1, help="Entries evaluated concurrently")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="Generate a click track at a known tempo")
    p.add_argument("--bpm", type=float, required=True)
    p.add_argument("--duration", type=float, default=SYNTH_DURATION_SECONDS)
    p.add_argument("--carrier", type=float, default=SYNTH_CARRIER_HZ)
    p.add_argument("--noise", type=float, default=SYNTH_NOISE_AMP)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        set_level(logging.DEBUG)

    try:
        return args.func(args)
    except StbeatError as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
