"""Command-line interface.

Exit status is 0 on success, 2 for usage or data errors and 1 for anything
unexpected.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .bundle import BundleError, read_bundle, write_bundle
from .detect import MEMBERS, BundleScorer, DetectionError, parse_members
from .io import atomic_write_text
from .metrics import SCHEME_NAMES
from .report import (
    METRIC_NAMES,
    ReportError,
    bias_summary,
    build_report,
    format_table,
    histogram,
    histogram_csv,
    report_json,
)
from .scores import (
    ScoreDataError,
    read_quantities_csv,
    read_scores_csv,
    write_quantities_csv,
    write_scores_csv,
)
from .synth import DEFAULT_BAND_EDGES, ExperimentDesign, SynthConfig, SynthError, make_experiment


class UsageError(Exception):
    pass


DATA_ERRORS = (UsageError, ScoreDataError, ReportError, BundleError, DetectionError, SynthError, ValueError, OSError)


def _named_paths(values, what: str) -> dict[str, Path]:
    out = {}
    for value in values or []:
        name, sep, path = value.partition("=")
        if not sep:
            name, path = Path(value).stem, value
        if name in out:
            raise UsageError(f"{what} name {name!r} given twice")
        out[name] = Path(path)
    return out


def cmd_metrics(args) -> int:
    scores = _named_paths(args.scores, "scores")
    score_sets = {name: read_scores_csv(path) for name, path in scores.items()}
    quantities = {}
    if args.quantities:
        unnamed = [q for q in args.quantities if "=" not in q]
        if len(args.quantities) == 1 and unnamed:
            q = read_quantities_csv(unnamed[0])
            quantities = {name: q for name in score_sets}
        else:
            for name, path in _named_paths(args.quantities, "quantities").items():
                if name not in score_sets:
                    raise UsageError(f"quantities given for unknown type {name!r}")
                quantities[name] = read_quantities_csv(path)
    schemes = args.scheme
    if schemes and "physics" in schemes:
        lacking = [name for name in score_sets if name not in quantities]
        if lacking:
            raise UsageError(f"--scheme physics needs --quantities for: {', '.join(lacking)}")
    report = build_report(score_sets, schemes, quantities)
    if args.out:
        atomic_write_text(args.out, report_json(report))
    if args.json:
        sys.stdout.write(report_json(report))
    else:
        sys.stdout.write(format_table(report))
    return 0


def cmd_synth(args) -> int:
    overrides = {
        k: v for k, v in {
            "sample_rate": args.sample_rate,
            "duration": args.duration,
            "channels": args.channels,
            "noise_sigma": args.noise_sigma,
        }.items() if v is not None
    }
    config = SynthConfig(seed=args.seed, **overrides)
    design = ExperimentDesign.full_scale() if args.full_scale else ExperimentDesign()
    bundle = make_experiment(config, design)
    write_bundle(bundle, args.out)
    print(f"wrote {len(bundle.records)} frames to {args.out}")
    return 0


def cmd_detect(args) -> int:
    members = parse_members(args.members or "")
    bundle = read_bundle(args.bundle)
    scorer = BundleScorer(bundle, args.bands or DEFAULT_BAND_EDGES)
    score_sets = scorer.score_sets(members)
    out = Path(args.out)
    for fault_type, score_set in score_sets.items():
        rows = [(s, level) for level in score_set.levels for s in score_set.groups[level]]
        write_scores_csv(out / f"scores_{fault_type.value}.csv", rows)
        write_quantities_csv(out / f"quantities_{fault_type.value}.csv", bundle.quantity_map(fault_type))
    print(f"members {'+'.join(members)}: wrote scores for {', '.join(t.value for t in score_sets)} to {out}")
    return 0


def cmd_histogram(args) -> int:
    hist = histogram(read_scores_csv(args.scores), args.bins)
    text = histogram_csv(hist)
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bias(args) -> int:
    if len(args.reports) < 2:
        raise UsageError("bias needs at least two report files")
    reports = []
    for path in args.reports:
        try:
            reports.append(json.loads(Path(path).read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: not a JSON report ({exc})") from None
    summary = bias_summary(reports, args.x, args.y)
    restricted = summary["auroc1_bias"]
    print(f"x={summary['x']}  y={summary['y']}")
    print(f"bias (all {summary['rows']} rows): {summary['bias']:+.4f}")
    if restricted is None:
        print("bias (AUROC = 1): no rows")
    else:
        print(f"bias (AUROC = 1, {summary['auroc1_rows']} rows): {restricted:+.4f}")
    if args.out:
        atomic_write_text(args.out, json.dumps(summary, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wsauroc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", help="AUROC and WS-AUROC for score files")
    p.add_argument("scores", nargs="+", help="score CSV (score,severity), optionally NAME=PATH")
    p.add_argument("--quantities", action="append",
                   help="quantity CSV (severity,quantity); NAME=PATH per type or one PATH for all")
    p.add_argument("--scheme", action="append", choices=SCHEME_NAMES,
                   help="penalty scheme (repeatable); default uniform, index and physics if quantities given")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--json", action="store_true", help="print JSON instead of the text table")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("synth", help="generate a synthetic experiment bundle")
    p.add_argument("--out", required=True, help="bundle directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--full-scale", action="store_true", help="full-size sample counts (432/54/54, 54 per level)")
    p.add_argument("--sample-rate", type=float)
    p.add_argument("--duration", type=float)
    p.add_argument("--channels", type=int)
    p.add_argument("--noise-sigma", type=float)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("detect", help="score a bundle's test frames with an ensemble")
    p.add_argument("bundle", help="bundle directory written by synth")
    p.add_argument("--members", help=f"comma-separated subset of {','.join(MEMBERS)}")
    p.add_argument("--bands", type=float, nargs="+", help="band edges in Hz for the band member")
    p.add_argument("--out", required=True, help="output directory for scores_<type>.csv")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("histogram", help="per-level score histogram as CSV")
    p.add_argument("scores")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("bias", help="mean(y - x) across metric reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--x", default="auroc", choices=METRIC_NAMES)
    p.add_argument("--y", default="ws_auroc_physics", choices=METRIC_NAMES)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bias)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DATA_ERRORS as exc:
        print(f"wsauroc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"wsauroc {args.command}: internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
