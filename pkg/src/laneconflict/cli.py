"""Command-line entry point.

Subcommands: generate, denoise, analyze, report, oracle-check.
Exit codes: 0 success, 1 validation error, 2 I/O error, 3 oracle disagreement.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import detect, io, oracle, report, scenario
from .denoise import DEFAULT_LEVELS, denoise_track
from .detect import ConflictConfig
from .geometry import ttc
from .types import Dataset, ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_ORACLE = 3


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _conflict_config(args, file_cfg: dict) -> ConflictConfig:
    def pick(flag, key, default):
        if flag is not None:
            return flag
        return file_cfg.get(key, default)

    cfg = ConflictConfig(
        ttc_threshold=pick(args.ttc_threshold, "ttc_threshold", 3.0),
        pruning_radius=pick(args.pruning_radius, "pruning_radius", 75.0),
        merge_gap=pick(args.merge_gap, "merge_gap", 0.5),
        min_duration=pick(args.min_duration, "min_duration", 1),
    )
    cfg.validate()
    return cfg


def _report_config(args, file_cfg: dict) -> report.ReportConfig:
    filter_tp = getattr(args, "filter_type_pair", None) \
        or file_cfg.get("filter_type_pair")
    return report.ReportConfig(
        bin_width=getattr(args, "bin_width", None) or file_cfg.get("bin_width", 1.0),
        cell_size=getattr(args, "cell_size", None) or file_cfg.get("cell_size", 2.0),
        filter_type_pair=detect.TypePair(filter_tp) if filter_tp else None,
        svg=bool(getattr(args, "svg", False)),
        ttc_threshold=getattr(args, "ttc_threshold", None)
        or file_cfg.get("ttc_threshold", 3.0),
    )


def _maybe_denoise(dataset: Dataset, args) -> Dataset:
    if not getattr(args, "denoise", False):
        return dataset
    levels = getattr(args, "denoise_levels", None) or DEFAULT_LEVELS
    tracks = [denoise_track(t, levels, dataset.site.frame_rate)
              for t in dataset.tracks]
    return Dataset(site=dataset.site, tracks=tracks,
                   lane_column_present=dataset.lane_column_present)


def _clean(paths: list[str]) -> None:
    for p in paths:
        try:
            os.remove(p)
        except OSError:
            pass


def cmd_generate(args) -> int:
    if args.spec:
        spec = scenario.load_spec(args.spec)
        if args.seed is not None:
            spec.seed = args.seed
    else:
        spec = scenario.reference_scenario(args.seed or 0)
    dataset = scenario.generate(spec)
    os.makedirs(args.out, exist_ok=True)
    io.write_tracks(dataset, os.path.join(args.out, "tracks.csv"))
    io.write_site(dataset.site, os.path.join(args.out, "site.json"))
    print(f"wrote {len(dataset.tracks)} tracks to {args.out}")
    return EXIT_OK


def cmd_denoise(args) -> int:
    dataset = io.ingest_dataset(args.tracks, args.site)
    levels = args.levels or DEFAULT_LEVELS
    tracks = [denoise_track(t, levels, dataset.site.frame_rate)
              for t in dataset.tracks]
    out = Dataset(site=dataset.site, tracks=tracks,
                  lane_column_present=dataset.lane_column_present)
    io.write_tracks(out, args.out)
    print(f"denoised {len(tracks)} tracks -> {args.out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    file_cfg = _load_config_file(args.config)
    conflict_cfg = _conflict_config(args, file_cfg)
    dataset = io.ingest_dataset(args.tracks, args.site)
    dataset = _maybe_denoise(dataset, args)
    events = detect.detect_conflicts(dataset, conflict_cfg,
                                     threads=args.threads)
    os.makedirs(args.out, exist_ok=True)
    written = []
    try:
        conflicts_path = os.path.join(args.out, "conflicts.csv")
        detect.write_conflicts_csv(events, conflicts_path)
        written.append(conflicts_path)
        rep_cfg = _report_config(args, file_cfg)
        rep_cfg.ttc_threshold = conflict_cfg.ttc_threshold
        written += report.render_report(dataset, events, rep_cfg, args.out)
    except Exception:
        _clean(written)
        raise
    print(f"{len(events)} conflict events -> {conflicts_path}")
    return EXIT_OK


def cmd_report(args) -> int:
    file_cfg = _load_config_file(args.config)
    dataset = io.ingest_dataset(args.tracks, args.site)
    if args.conflicts:
        events = detect.read_conflicts_csv(args.conflicts)
    else:
        events = detect.detect_conflicts(dataset, _conflict_config(args, file_cfg),
                                         threads=args.threads)
    report.render_report(dataset, events, _report_config(args, file_cfg), args.out)
    print(f"report bundle -> {args.out}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    if args.n <= 0:
        raise ValidationError("n must be positive")
    rng = np.random.default_rng(args.seed)
    pairs = [oracle.random_pair(rng) for _ in range(args.n)]
    pairs += oracle.ADVERSARIAL_CORPUS
    worst = 0.0
    failures = []
    for i, pair in enumerate(pairs):
        analytic = ttc(pair).ttc
        stepped = oracle.ttc_oracle(pair, dt=args.dt, horizon=args.horizon)
        if analytic is None and stepped is None:
            continue
        if analytic is not None and stepped is None:
            if analytic > args.horizon - 2 * args.dt:
                continue
            failures.append(i)
            continue
        if analytic is None and stepped is not None:
            failures.append(i)
            continue
        err = abs(analytic - stepped)
        worst = max(worst, err)
        if err > 2 * args.dt:
            failures.append(i)
    print(f"checked {len(pairs)} pairs (seed {args.seed}); "
          f"worst agreement {worst:.2e} s")
    if failures:
        print(f"disagreements at pair indices: {failures}", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laneconflict",
        description="Lane-change conflict analysis from vehicle trajectories")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic tracks/site dataset")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--spec", help="JSON scenario spec file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("denoise", help="wavelet-denoise a tracks CSV")
    p.add_argument("--tracks", required=True)
    p.add_argument("--site", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--levels", type=int, default=None)
    p.set_defaults(func=cmd_denoise)

    def add_analysis_flags(p):
        p.add_argument("--config", help="JSON config file; flags win")
        p.add_argument("--ttc-threshold", dest="ttc_threshold", type=float)
        p.add_argument("--pruning-radius", dest="pruning_radius", type=float)
        p.add_argument("--merge-gap", dest="merge_gap", type=float)
        p.add_argument("--min-duration", dest="min_duration", type=int)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--bin-width", dest="bin_width", type=float)
        p.add_argument("--cell-size", dest="cell_size", type=float)
        p.add_argument("--filter-type-pair", dest="filter_type_pair",
                       choices=[tp.value for tp in detect.TypePair])
        p.add_argument("--svg", action="store_true")

    p = sub.add_parser("analyze", help="full pipeline: ingest, detect, report")
    p.add_argument("--tracks", required=True)
    p.add_argument("--site", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--denoise", action="store_true")
    p.add_argument("--denoise-levels", dest="denoise_levels", type=int)
    add_analysis_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="analytics bundle from a dataset")
    p.add_argument("--tracks", required=True)
    p.add_argument("--site", required=True)
    p.add_argument("--conflicts", help="existing conflicts CSV; else recompute")
    p.add_argument("--out", required=True)
    add_analysis_flags(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("oracle-check",
                       help="analytic TTC vs brute-force stepping oracle")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--horizon", type=float, default=10.0)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
