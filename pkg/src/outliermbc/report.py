"""Run reports, assignment files and dissimilarity-curve plots."""

import csv
import json
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def _finite_or_none(v):
    v = float(v)
    return v if math.isfinite(v) else None


def curve_payload(trace):
    return {
        "m": list(range(len(trace.steps))),
        "aggregated": [_finite_or_none(s.dissim.aggregated) for s in trace.steps],
        "valid": [bool(s.valid) for s in trace.steps],
        "per_component": [[_finite_or_none(v) for v in s.dissim.per_component] for s in trace.steps],
        "removed_original_index": [s.removed_original_index for s in trace.steps],
    }


def dumps(payload):
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(payload))


def write_assignments(path, assignments, index_map=None):
    """Two columns: original row index (0-based) and cluster label (0 = outlier)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "cluster"])
        for i, g in enumerate(assignments):
            w.writerow([i if index_map is None else int(index_map[i]), int(g)])


def write_curve_csv(path, trace):
    G = trace.G
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "D_m", "valid"] + [f"D_m{g + 1}" for g in range(G)])
        for s in trace.steps:
            agg = repr(float(s.dissim.aggregated)) if s.valid else ""
            per = [repr(float(v)) if s.valid else "" for v in s.dissim.per_component]
            w.writerow([s.m, agg, int(s.valid)] + per)


def rescaled_curve(trace):
    """Curve divided by its valid minimum; invalid steps are NaN."""
    curve = np.where(trace.valid_mask, trace.curve, np.nan)
    finite = curve[np.isfinite(curve)]
    if finite.size == 0:
        return curve
    lo = finite.min()
    return curve / lo if lo > 0 else curve


def curve_svg(trace, o_min=None, o_bt=None, width=640, height=400):
    """Static SVG line plot of the rescaled curve; invalid steps break the line."""
    y = rescaled_curve(trace)
    m = np.arange(y.shape[0])
    left, right, top, bottom = 60, 20, 20, 45
    pw, ph = width - left - right, height - top - bottom
    finite = y[np.isfinite(y)]
    y_lo = 1.0 if finite.size == 0 else float(min(1.0, finite.min()))
    y_hi = 1.0 if finite.size == 0 else float(finite.max())
    if y_hi - y_lo < 1e-12:
        y_hi = y_lo + 1.0
    x_hi = max(1, m[-1])

    def sx(v):
        return left + pw * v / x_hi

    def sy(v):
        return top + ph * (1.0 - (v - y_lo) / (y_hi - y_lo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for k in range(5):
        xv = x_hi * k / 4
        yv = y_lo + (y_hi - y_lo) * k / 4
        out.append(f'<text x="{sx(xv):.2f}" y="{top + ph + 16}" font-size="11" text-anchor="middle">{xv:g}</text>')
        out.append(f'<text x="{left - 6}" y="{sy(yv) + 4:.2f}" font-size="11" text-anchor="end">{yv:.3f}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 8}" font-size="12" text-anchor="middle">outliers removed (m)</text>')
    out.append(
        f'<text x="14" y="{top + ph / 2:.2f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 14 {top + ph / 2:.2f})">dissimilarity / minimum</text>'
    )
    # one polyline per run of valid steps
    run = []
    for i in range(y.shape[0] + 1):
        if i < y.shape[0] and np.isfinite(y[i]):
            run.append(f"{sx(m[i]):.2f},{sy(y[i]):.2f}")
            continue
        if run:
            out.append(f'<polyline fill="none" stroke="#1f4e9c" stroke-width="1.5" points="{" ".join(run)}"/>')
            run = []
    if o_min is not None and np.isfinite(y[o_min]):
        out.append(f'<circle class="minimum" cx="{sx(o_min):.2f}" cy="{sy(y[o_min]):.2f}" r="4" fill="#c0392b"/>')
    if o_bt is not None and np.isfinite(y[o_bt]):
        out.append(
            f'<rect class="backtrack" x="{sx(o_bt) - 4:.2f}" y="{sy(y[o_bt]) - 4:.2f}" width="8" height="8" '
            'fill="none" stroke="#27ae60" stroke-width="1.5"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_curve(trace, directory, o_min=None, o_bt=None):
    """Write ``curve.csv`` and ``curve.svg`` into ``directory``."""
    directory = Path(directory)
    write_curve_csv(directory / "curve.csv", trace)
    (directory / "curve.svg").write_text(curve_svg(trace, o_min, o_bt), encoding="utf-8")
