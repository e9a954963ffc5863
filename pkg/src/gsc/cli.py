"""Command-line front end.

Subcommands cover the full pipeline: ``simulate`` data, ``segment``
tracks, ``subsample`` a statistic for confidence intervals,
``select-block-size``, ``test`` independence, and ``reproduce`` the
packaged simulation studies.  Every randomized command either takes a
seed or generates one and records it, and all outputs embed the exact
configuration, so reruns are byte-identical (including across
``--threads`` settings).

Exit codes: 0 success, 2 input error, 3 parameter or feasibility error.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from . import rng as _rng
from ._parallel import default_threads
from .errors import GscError, InputError, ParameterError
from .segmentation import Segmentation, SegmentationParams, segment_pair
from .simulate import NeymanScottParams, simulate_piecewise_pair
from .stats import OverlapStatistic, parse_statistic, window_mean
from .studies import STUDIES, run_study
from .subsampling import (
    SubsampleParams,
    ci_gaussian,
    ci_percentile,
    normality_diagnostic,
    select_block_size,
    standard_error,
    subsample_replicates,
)
from .testing import TestParams, double_bootstrap_region_overlap, test_bp_overlap
from .tracks import TrackPair, indicator_sum, load_bed, read_sequence_lengths, write_bed

EXIT_INPUT = 2
EXIT_PARAMS = 3


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsc",
        description="Segmented block subsampling for paired genomic feature tracks.",
    )
    parser.add_argument("--version", action="version", version=f"gsc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tracks=True, segmentable=False):
        if tracks:
            p.add_argument("--track-a", required=True, help="BED-like file for feature A")
            p.add_argument("--track-b", required=True, help="BED-like file for feature B")
            p.add_argument(
                "--lengths", required=True, help="two-column text file: sequence name, length"
            )
        if segmentable:
            p.add_argument("--segments", help="segmentation file (start, end per line)")
            p.add_argument("--min-segment", type=int, default=2000)
            p.add_argument("--threshold-b", type=float, default=0.0)
            p.add_argument("--block-hint", type=int, default=None)
            p.add_argument(
                "--signal", choices=("merged", "a", "b", "joint"), default="merged"
            )
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--format", choices=("json", "tsv"), default="json")
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("segment", help="estimate a segmentation of a track pair")
    common(p, segmentable=True)
    p.set_defaults(handler=cmd_segment)

    p = sub.add_parser("subsample", help="replicate distribution and confidence intervals")
    common(p, segmentable=True)
    p.add_argument("--statistic", default="bp-overlap")
    p.add_argument("--block-length", type=int, required=True)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--level", type=float, default=0.95)
    p.set_defaults(handler=cmd_subsample)

    p = sub.add_parser("select-block-size", help="data-driven subsample length")
    common(p, segmentable=True)
    p.add_argument("--statistic", default="bp-overlap")
    p.add_argument("--rho", type=float, default=0.7)
    p.add_argument("--grid-steps", type=int, default=12)
    p.add_argument("--replicates", type=int, default=1000)
    p.set_defaults(handler=cmd_select)

    p = sub.add_parser("test", help="independence test of two tracks")
    common(p, segmentable=True)
    p.add_argument("--statistic", choices=("bp-overlap", "region-overlap"), default="bp-overlap")
    p.add_argument("--block-length", type=int, required=True)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--formulation", choices=("conditional", "marginal"), default="conditional")
    p.add_argument("--outer-multiplier", type=float, default=5.0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--two-sided", action="store_true")
    p.set_defaults(handler=cmd_test)

    p = sub.add_parser("simulate", help="generate a cluster-process track pair")
    p.add_argument(
        "--regions",
        required=True,
        help="comma-separated length:rate:cluster_size:offset:feature_length",
    )
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("reproduce", help="run a packaged simulation study")
    p.add_argument("--study", choices=sorted(STUDIES) + ["all"], required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--scale", type=float, default=1.0, help="shrink factor for quick runs")
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_reproduce)
    return parser


def _resolve_seed(args) -> int:
    if args.seed is None:
        return secrets.randbits(48)
    return _rng.canonical_seed(args.seed)


def _resolve_threads(args) -> int:
    if getattr(args, "threads", None) is None:
        return default_threads()
    return max(1, args.threads)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_pair(args) -> TrackPair:
    space = read_sequence_lengths(args.lengths)
    return TrackPair(load_bed(args.track_a, space), load_bed(args.track_b, space))


def _segmentation(args, pair: TrackPair):
    """(segmentation, report dict) from --segments or a fresh estimate."""
    if getattr(args, "segments", None):
        seg = Segmentation.from_text(args.segments)
        if seg.n != pair.n:
            raise InputError(
                f"segmentation covers {seg.n} bases but tracks cover {pair.n}"
            )
        return seg, {"source": args.segments, "provenance": seg.provenance}
    params = SegmentationParams(
        min_length=args.min_segment,
        threshold=args.threshold_b,
        block_hint=args.block_hint,
        signal=args.signal,
    )
    merged = segment_pair(pair, params)
    report = {
        "source": "estimated",
        "min_segment": args.min_segment,
        "threshold_b": args.threshold_b,
        "signal": args.signal,
        "flagged_regions": [list(r) for r in merged.flagged],
        "flagged_length": merged.flagged_length,
    }
    return merged.segmentation, report


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_tsv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    cols = list(rows[0].keys())
    lines = ["\t".join(cols)]
    for row in rows:
        lines.append("\t".join(str(row[c]) for c in cols))
    path.write_text("\n".join(lines) + "\n")


def _echo_config(args, seed: int) -> dict:
    skip = {"handler", "seed"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    cfg["seed"] = seed
    return cfg


def cmd_segment(args) -> int:
    pair = _load_pair(args)
    seed = _resolve_seed(args)
    seg, seg_report = _segmentation(args, pair)
    out = _outdir(args)
    seg.to_text(out / "segments.txt")
    regions = []
    for lo, hi in seg.segments():
        regions.append(
            {
                "start": lo,
                "end": hi,
                "a_mean": indicator_sum(pair.a, lo, hi) / (hi - lo),
                "b_mean": indicator_sum(pair.b, lo, hi) / (hi - lo),
            }
        )
    payload = {
        "config": _echo_config(args, seed),
        "segmentation": seg_report | {"cuts": list(seg.cuts), "regions": len(regions)},
        "regions": regions,
    }
    write_json(out / "segment_report.json", payload)
    if args.format == "tsv":
        write_tsv(out / "regions.tsv", regions)
    print(f"{len(regions)} region(s) -> {out / 'segments.txt'}")
    return 0


def cmd_subsample(args) -> int:
    pair = _load_pair(args)
    seed = _resolve_seed(args)
    threads = _resolve_threads(args)
    kind = parse_statistic(args.statistic)
    seg, seg_report = _segmentation(args, pair)
    params = SubsampleParams(
        length=args.block_length,
        replicates=args.replicates,
        seed=seed,
        segmentation=seg,
    )
    dist = subsample_replicates(pair, kind, params, threads=threads)
    observed = window_mean(kind, pair, [(0, pair.n)])
    gaussian = ci_gaussian(observed, dist, pair.n, args.level)
    percentile = ci_percentile(dist, args.level)
    out = _outdir(args)
    dist.save_text(out / "replicates.txt")
    payload = {
        "config": _echo_config(args, seed),
        "segmentation": seg_report,
        "observed": observed.value,
        "standard_error": standard_error(dist, pair.n),
        "intervals": {
            "gaussian": {"lower": gaussian.lower, "upper": gaussian.upper, "level": args.level},
            "percentile": {
                "lower": percentile.lower,
                "upper": percentile.upper,
                "level": args.level,
            },
        },
        "replicates": dist.summary(),
        "normality": (
            asdict(normality_diagnostic(dist)) if dist.count >= 20 else None
        ),
    }
    write_json(out / "subsample.json", payload)
    print(
        f"{args.statistic}={observed.value:.6g} "
        f"gaussian CI [{gaussian.lower:.6g}, {gaussian.upper:.6g}]"
    )
    return 0


def cmd_select(args) -> int:
    pair = _load_pair(args)
    seed = _resolve_seed(args)
    threads = _resolve_threads(args)
    kind = parse_statistic(args.statistic)
    seg, seg_report = _segmentation(args, pair)
    selection = select_block_size(
        pair, seg, kind,
        rho=args.rho, steps=args.grid_steps, replicates=args.replicates,
        seed=seed, threads=threads,
    )
    out = _outdir(args)
    payload = {
        "config": _echo_config(args, seed),
        "segmentation": seg_report,
        "chosen_length": selection.chosen_length,
        "observed": selection.observed,
        "table": selection.table(),
    }
    write_json(out / "block_size.json", payload)
    if args.format == "tsv":
        write_tsv(out / "block_size.tsv", selection.table())
    print(f"chosen block length: {selection.chosen_length}")
    return 0


def cmd_test(args) -> int:
    pair = _load_pair(args)
    seed = _resolve_seed(args)
    threads = _resolve_threads(args)
    seg, seg_report = _segmentation(args, pair)
    params = TestParams(
        length=args.block_length,
        replicates=args.replicates,
        seed=seed,
        segmentation=seg,
        formulation=args.formulation,
        outer_multiplier=args.outer_multiplier,
        two_sided=args.two_sided,
    )
    if args.statistic == "bp-overlap":
        result = test_bp_overlap(pair, params, alpha=args.alpha, threads=threads)
    else:
        result = double_bootstrap_region_overlap(pair, params, alpha=args.alpha, threads=threads)
    out = _outdir(args)
    payload = {"config": _echo_config(args, seed), "segmentation": seg_report}
    payload.update(result.to_dict())
    write_json(out / "test_result.json", payload)
    result.replicates.save_text(out / "null_replicates.txt")
    print(
        f"{result.statistic}: observed={result.observed:.6g} center={result.center:.6g} "
        f"z={result.z_score:.3g} p={result.p_value:.4g}"
    )
    return 0


def _parse_regions(text: str):
    rows = []
    for chunk in text.split(","):
        parts = chunk.split(":")
        if len(parts) != 5:
            raise ParameterError(
                "each region must be length:rate:cluster_size:offset:feature_length"
            )
        rows.append(
            (int(parts[0]), float(parts[1]), float(parts[2]), float(parts[3]), float(parts[4]))
        )
    return NeymanScottParams.from_tuples(rows)


def cmd_simulate(args) -> int:
    params = _parse_regions(args.regions)
    seed = _resolve_seed(args)
    pair, truth = simulate_piecewise_pair(params, _rng.generator(seed))
    out = _outdir(args)
    write_bed(pair.a, out / "a.bed")
    write_bed(pair.b, out / "b.bed")
    truth.to_text(out / "truth_segments.txt")
    space = pair.space
    with open(out / "lengths.txt", "w") as fh:
        for name, length in zip(space.names, space.lengths):
            fh.write(f"{name}\t{length}\n")
    manifest = {
        "config": _echo_config(args, seed),
        "tracks": {
            "a": {"instances": pair.a.run_count, "covered": pair.a.total_coverage},
            "b": {"instances": pair.b.run_count, "covered": pair.b.total_coverage},
        },
        "true_cuts": list(truth.cuts),
    }
    write_json(out / "manifest.json", manifest)
    print(f"wrote pair ({pair.a.run_count}/{pair.b.run_count} instances) to {out}")
    return 0


def cmd_reproduce(args) -> int:
    seed = _resolve_seed(args)
    names = sorted(STUDIES) if args.study == "all" else [args.study]
    out = _outdir(args)
    report = {"config": _echo_config(args, seed), "studies": {}}
    overall = True
    for name in names:
        overrides = _scaled_overrides(name, args.scale)
        result = run_study(name, seed=_rng.derive_seed(seed, name), **overrides)
        report["studies"][name] = result.to_dict()
        for table_name, rows in result.tables.items():
            write_tsv(out / f"{name}_{table_name}.tsv", rows)
        for check in result.checks:
            status = "PASS" if check["passed"] else "FAIL"
            print(f"[{name}] {status}: {check['label']} (value={check['value']:.6g})")
            overall &= check["passed"]
        if not result.checks:
            print(f"[{name}] report only (no bounds)")
    report["all_passed"] = overall
    write_json(out / "reproduce.json", report)
    return 0


def _scaled_overrides(name: str, scale: float) -> dict:
    if scale >= 1.0:
        return {}
    def shrink(x, floor=8):
        return max(floor, int(x * scale))
    if name == "sim1":
        return {"truth_sequences": shrink(1000, 50), "estimate_sequences": shrink(8, 2)}
    if name == "sim2a":
        return {"truth_pairs": shrink(2000, 100), "estimate_pairs": shrink(24, 3)}
    if name == "sim2b":
        return {"population_pairs": shrink(5000, 100), "replicates": shrink(2000, 200)}
    if name == "size":
        return {"trials": shrink(500, 25)}
    if name == "recovery":
        return {"runs": shrink(200, 20), "gaussianity_pairs": shrink(6, 2)}
    return {}


if __name__ == "__main__":
    sys.exit(main())
