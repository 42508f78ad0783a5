"""Report documents: ``{meta, config, results}`` as JSON, CSV or a text table."""

import csv
import io
import json
import math

import numpy as np

from . import __version__, rng

SCHEMA = "hellinger-invariant/report/1"


def meta():
    return {
        "schema": SCHEMA,
        "tool": "hellinger-invariant",
        "version": __version__,
        "rng": rng.ALGORITHM,
        "rng_labels": ["correlation", "student", "perturb", "multistart"],
        "covariance_normalization": "1/(T-1)",
        "covariance_ridge": "1e-12 * trace(cov) / n added to the diagonal",
        "binning": "equal width over the sample range; last bin closed",
        "perturbation_target": "log-return entries, multiplied by (1 + u)",
        "percent_estimator": "100 * mean(|delta h2|) / baseline h2",
    }


def _weights(w):
    return None if w is None else [float(x) for x in w]


def invariant_results(report, ridge=None):
    frontier = []
    for p in report.frontier:
        frontier.append({
            "target_return": p.target_return,
            "mv_variance": p.mv_variance,
            "mv_weights": _weights(p.mv_weights),
            "hellinger_sq_min": p.hellinger_sq_min,
            "hellinger_weights": _weights(p.hellinger_weights),
            "error": p.error,
        })
    return {
        "market_label": report.market_label,
        "invariant_h2": report.invariant_h2,
        "argmin_e": report.argmin_e,
        "covariance_ridge": ridge,
        "failed_points": sum(p.failed for p in report.frontier),
        "frontier": frontier,
    }


def sensitivity_results(label, rep):
    return {
        "market_label": label,
        "kind": rep.kind,
        "baseline_h2": rep.baseline_h2,
        "mean_abs_change": rep.mean_abs_change,
        "mean_pct_change": rep.mean_pct_change,
        "replication_count": rep.replication_count,
        "failed_replications": rep.failed_replications,
        "details": rep.details,
        "per_replication_changes": rep.per_replication_changes,
    }


def _number(x):
    # JSON has no NaN/inf
    if not math.isfinite(x):
        return "null"
    return format(x, "#.17g")


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _number(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode(str(k), indent, level + 1)}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) or v is None for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc, indent=2):
    """JSON text with keys in insertion order and floats at 17 significant digits."""
    return _encode(doc, indent, 0) + "\n"


def _fmt(x):
    if x is None:
        return "n/a"
    return repr(float(x))


def _grid(rows):
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = [" | ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def invariant_table(results):
    """Markets as columns, one ``H^2`` row."""
    rows = [[""] + [r["market_label"] for r in results],
            ["H^2"] + [_fmt(r["invariant_h2"]) for r in results]]
    return _grid(rows)


def sensitivity_table(results):
    """Markets as columns; rows ``Percentages`` and ``Absolute value``."""
    rows = [[""] + [r["market_label"] for r in results],
            ["Percentages"] + [("n/a" if r["mean_pct_change"] is None else f"{r['mean_pct_change']!r}%")
                               for r in results],
            ["Absolute value"] + [_fmt(r["mean_abs_change"]) for r in results]]
    return _grid(rows)


def invariant_csv(results):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["market", "target_return", "mv_variance", "hellinger_sq_min", "is_invariant",
                "mv_weights", "hellinger_weights"])
    for r in results:
        for p in r["frontier"]:
            w.writerow([r["market_label"], _fmt(p["target_return"]), _fmt(p["mv_variance"]),
                        _fmt(p["hellinger_sq_min"]), int(p["target_return"] == r["argmin_e"]),
                        " ".join(_fmt(x) for x in p["mv_weights"] or []),
                        " ".join(_fmt(x) for x in p["hellinger_weights"] or [])])
    return buf.getvalue()


def sensitivity_csv(results):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["market", "kind", "baseline_h2", "mean_abs_change", "mean_pct_change",
                "replication_count", "failed_replications"])
    for r in results:
        w.writerow([r["market_label"], r["kind"], _fmt(r["baseline_h2"]), _fmt(r["mean_abs_change"]),
                    _fmt(r["mean_pct_change"]), r["replication_count"], r["failed_replications"]])
    return buf.getvalue()
