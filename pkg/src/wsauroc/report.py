"""Metric reports, histogram export and metric-bias tables."""

from __future__ import annotations

import json
import math
from collections.abc import Mapping, Sequence

import numpy as np

from .metrics import (
    SCHEME_NAMES,
    metric_bias,
    normal_vs_pooled_auroc,
    pairwise_auroc,
    scheme_from_name,
    ws_auroc,
)
from .scores import PhysicalQuantityMap, ScoreDataError, SeverityScoreSet, validate_quantities

REPORT_VERSION = 1


class ReportError(ValueError):
    pass


def type_entry(score_set: SeverityScoreSet, schemes: Sequence[str],
               quantities: PhysicalQuantityMap | None = None) -> dict:
    entry = {
        "n": score_set.max_index,
        "sizes": score_set.sizes(),
        "auroc": normal_vs_pooled_auroc(score_set),
        "ws_auroc": {},
    }
    if quantities is not None:
        validate_quantities(score_set, quantities)
        entry["quantities"] = list(quantities.quantities)
        entry["unit"] = quantities.unit
    for name in schemes:
        if name == "physics" and quantities is None:
            raise ScoreDataError("physics penalty requested but no physical quantities were given")
        entry["ws_auroc"][name] = ws_auroc(score_set, scheme_from_name(name, quantities))
    entry["pairwise"] = [
        {"i": i, "j": j, "auroc": a} for (i, j), a in pairwise_auroc(score_set).items()
    ]
    return entry


def build_report(score_sets: Mapping[str, SeverityScoreSet], schemes: Sequence[str] | None = None,
                 quantities: Mapping[str, PhysicalQuantityMap] | None = None) -> dict:
    """Per-type AUROC and WS-AUROC plus arithmetic means across types.

    Without an explicit ``schemes`` list, uniform and index are always
    computed and physics is added when every type has quantities.
    """
    quantities = dict(quantities or {})
    if schemes is None:
        schemes = ["uniform", "index"]
        if score_sets and all(name in quantities for name in score_sets):
            schemes.append("physics")
    schemes = [s for s in SCHEME_NAMES if s in set(schemes)]
    types = {}
    for name, score_set in score_sets.items():
        try:
            types[name] = type_entry(score_set, schemes, quantities.get(name))
        except ScoreDataError as exc:
            raise ScoreDataError(f"{name}: {exc}") from exc
    average = {
        "auroc": math.fsum(t["auroc"] for t in types.values()) / len(types),
        "ws_auroc": {
            s: math.fsum(t["ws_auroc"][s] for t in types.values()) / len(types) for s in schemes
        },
    }
    return {"version": REPORT_VERSION, "schemes": schemes, "types": types, "average": average}


def report_json(report: dict) -> str:
    # json writes floats with repr(), the shortest string that round-trips
    return json.dumps(report, indent=2) + "\n"


def format_table(report: dict) -> str:
    schemes = report["schemes"]
    header = ["type", "AUROC"] + [f"WS-AUROC ({s[0].upper()})" for s in schemes]
    rows = []
    for name, entry in report["types"].items():
        rows.append([name, entry["auroc"]] + [entry["ws_auroc"][s] for s in schemes])
    avg = report["average"]
    rows.append(["average", avg["auroc"]] + [avg["ws_auroc"][s] for s in schemes])
    cells = [header] + [[r[0]] + [f"{v:.3f}" for v in r[1:]] for r in rows]
    widths = [max(len(row[c]) for row in cells) for c in range(len(header))]
    lines = []
    for k, row in enumerate(cells):
        lines.append("  ".join(cell.ljust(widths[0]) if c == 0 else cell.rjust(widths[c])
                               for c, cell in enumerate(row)))
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


# -- histograms --------------------------------------------------------------


def histogram(score_set: SeverityScoreSet, bins: int) -> dict:
    """Counts per severity level over shared equal-width bins.

    Returns ``{"edges": [...], "counts": {level: [...]}}``. The last bin is
    closed so the maximum score is counted.
    """
    if isinstance(bins, bool) or int(bins) != bins or bins < 1:
        raise ReportError(f"bins must be a positive integer, got {bins!r}")
    scores = np.asarray(score_set.all_scores())
    lo, hi = float(scores.min()), float(scores.max())
    if lo == hi:
        if bins > 1:
            raise ReportError(f"all scores equal {lo!r}; cannot split a zero-width range into {bins} bins")
        return {"edges": [lo, hi], "counts": {i: [len(score_set.groups[i])] for i in score_set.levels}}
    edges = np.linspace(lo, hi, bins + 1)
    counts = {
        i: np.histogram(score_set.groups[i], bins=edges)[0].astype(int).tolist() for i in score_set.levels
    }
    return {"edges": edges.tolist(), "counts": counts}


def histogram_csv(hist: dict) -> str:
    edges = hist["edges"]
    lines = ["severity,bin_low,bin_high,count"]
    for level, counts in hist["counts"].items():
        for b, count in enumerate(counts):
            lines.append(f"{level},{edges[b]!r},{edges[b + 1]!r},{count}")
    return "\n".join(lines) + "\n"


# -- bias --------------------------------------------------------------------


def metric_value(entry: dict, metric: str) -> float:
    """Look up ``auroc`` or ``ws_auroc_<scheme>`` in a per-type report entry."""
    if metric == "auroc":
        return entry["auroc"]
    prefix = "ws_auroc_"
    if metric.startswith(prefix) and metric[len(prefix):] in entry.get("ws_auroc", {}):
        return entry["ws_auroc"][metric[len(prefix):]]
    raise KeyError(metric)


METRIC_NAMES = ("auroc",) + tuple(f"ws_auroc_{s}" for s in SCHEME_NAMES)


def bias_rows(reports: Sequence[dict], x_metric: str, y_metric: str) -> list[tuple[float, float, float]]:
    """``(x, y, auroc)`` for every per-type entry in every report."""
    rows = []
    for k, rep in enumerate(reports):
        for name, entry in rep["types"].items():
            try:
                rows.append((metric_value(entry, x_metric), metric_value(entry, y_metric), entry["auroc"]))
            except KeyError as exc:
                raise ReportError(f"report {k}, type {name}: metric {exc.args[0]!r} not found") from None
    if not rows:
        raise ReportError("reports contain no anomaly types")
    return rows


def bias_summary(reports: Sequence[dict], x_metric: str, y_metric: str) -> dict:
    """Overall bias and bias restricted to rows whose AUROC is exactly 1."""
    rows = bias_rows(reports, x_metric, y_metric)
    overall = metric_bias([r[0] for r in rows], [r[1] for r in rows])
    perfect = [r for r in rows if r[2] == 1.0]
    restricted = metric_bias([r[0] for r in perfect], [r[1] for r in perfect]) if perfect else None
    return {
        "x": x_metric,
        "y": y_metric,
        "rows": len(rows),
        "bias": overall,
        "auroc1_rows": len(perfect),
        "auroc1_bias": restricted,
    }
