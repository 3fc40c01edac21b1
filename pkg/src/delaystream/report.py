"""Static SVG figures: per-run traces and the colour-matrix overview."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .evaluation import CRITERIA, RUN_KEYS, aggregate, sort_key
from .frameworks import FRAMEWORKS
from .streams import StreamConfig, drift_points

DETECTOR_ORDER = ("none", "DDM", "OCDD", "MD3", "ORACLE")
PANELS = (("mean_bac", "balanced accuracy"), ("label_request_fraction", "label requests"),
          ("trained_fraction", "rebuilds"))

# Diverging ramp: low values blue, high values red.
_RAMP = np.array([[59, 76, 192], [221, 221, 221], [180, 4, 38]], dtype=float)


def colour(t):
    """Hex colour for ``t`` in [0, 1] on the blue-grey-red ramp."""
    t = min(max(float(t), 0.0), 1.0) * 2
    k = min(int(t), 1)
    rgb = _RAMP[k] + (t - k) * (_RAMP[k + 1] - _RAMP[k])
    return "#" + "".join(f"{int(round(c)):02x}" for c in rgb)


def _svg(width, height, body):
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">\n'
        + "\n".join(body) + "\n</svg>\n"
    )


def trace_svg(bac, requested, trained, drift_chunks, title=""):
    """BAC over chunks with request marks (red), training marks (blue) and drift ticks.

    Args:
        bac: per-chunk balanced accuracy.
        requested, trained: per-chunk booleans.
        drift_chunks: ground-truth drift indices, used as x-axis ticks.
    """
    bac = np.asarray(bac, dtype=float)
    n = len(bac)
    W, H, left, right, top, bottom = 720, 200, 40, 10, 22, 28
    pw, ph = W - left - right, H - top - bottom

    def x(i):
        return left + pw * (i / max(n - 1, 1))

    def y(v):
        return top + ph * (1.0 - v)

    body = [f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="white" stroke="#444"/>',
            f'<text x="{left}" y="14">{escape(title)}</text>']
    for i in np.flatnonzero(requested):
        body.append(f'<line class="request" x1="{x(i):.2f}" x2="{x(i):.2f}" y1="{top}" y2="{top + ph / 2:.2f}" '
                    'stroke="#d62728" stroke-opacity="0.35"/>')
    for i in np.flatnonzero(trained):
        body.append(f'<line class="train" x1="{x(i):.2f}" x2="{x(i):.2f}" y1="{top + ph / 2:.2f}" y2="{top + ph}" '
                    'stroke="#1f4fd6"/>')
    pts = " ".join(f"{x(i):.2f},{y(v):.2f}" for i, v in enumerate(bac))
    body.append(f'<polyline class="bac" points="{pts}" fill="none" stroke="black" stroke-width="1"/>')
    for v in (0.0, 0.5, 1.0):
        body.append(f'<text x="{left - 4}" y="{y(v) + 3:.2f}" text-anchor="end">{v:.1f}</text>')
    for d in drift_chunks:
        body.append(f'<line class="drift-tick" x1="{x(d):.2f}" x2="{x(d):.2f}" y1="{top + ph}" '
                    f'y2="{top + ph + 4}" stroke="#444"/>')
        body.append(f'<text x="{x(d):.2f}" y="{top + ph + 14}" text-anchor="middle">{int(d)}</text>')
    return _svg(W, H, body)


def _column_key(col):
    clf, det = col
    return (clf, DETECTOR_ORDER.index(det) if det in DETECTOR_ORDER else len(DETECTOR_ORDER), det)


def overview_svg(table):
    """Three side-by-side colour matrices, one per criterion.

    Rows are (framework, n_drifts, delta), columns (classifier, detector). Each
    aggregated group becomes one cell per panel; each panel is scaled to its
    own min and max.
    """
    rows = sorted({(e["framework"], e["n_drifts"], e["delta"]) for e in table},
                  key=lambda r: (FRAMEWORKS.index(r[0]) if r[0] in FRAMEWORKS else 99, r))
    cols = sorted({(e["classifier"], e["detector"]) for e in table}, key=_column_key)
    ri = {r: k for k, r in enumerate(rows)}
    ci = {c: k for k, c in enumerate(cols)}
    cell, left, top, gap = 12, 120, 70, 30
    panel_w = cell * len(cols)
    W = left + len(PANELS) * (panel_w + gap)
    H = top + cell * len(rows) + 10
    body = []
    for r, (fw, k, d) in enumerate(rows):
        body.append(f'<text x="{left - 4}" y="{top + cell * r + 9}" text-anchor="end">'
                    f'{fw} {k} drifts d={d}</text>')
    for p, (crit, label) in enumerate(PANELS):
        x0 = left + p * (panel_w + gap)
        values = np.array([e[f"{crit}_mean"] for e in table])
        lo, hi = float(values.min()), float(values.max())
        span = hi - lo if hi > lo else 1.0
        body.append(f'<text x="{x0}" y="12">{label} [{lo:.3f}, {hi:.3f}]</text>')
        for c, (clf, det) in enumerate(cols):
            cx = x0 + cell * c + cell / 2
            body.append(f'<text x="{cx:.1f}" y="{top - 4}" transform="rotate(-60 {cx:.1f} {top - 4})">'
                        f'{clf} {det}</text>')
        for e in table:
            v = e[f"{crit}_mean"]
            xr = x0 + cell * ci[(e["classifier"], e["detector"])]
            yr = top + cell * ri[(e["framework"], e["n_drifts"], e["delta"])]
            body.append(f'<rect class="cell" data-criterion="{crit}" x="{xr}" y="{yr}" width="{cell}" '
                        f'height="{cell}" fill="{colour((v - lo) / span)}"><title>{v!r}</title></rect>')
    return _svg(W, H, body)


def _trace_name(key):
    fw, det, clf, k, d, s = key
    return f"trace_{fw}_{det}_{clf}_k{k}_delta{d}_seed{s}.svg"


def _select(keys, mode):
    """Runs that get a trace: all, none, or those of the first seed and smallest drift count."""
    if mode == "none" or not keys:
        return set()
    if mode == "all":
        return set(keys)
    seed = min(k[5] for k in keys)
    drifts = min(k[3] for k in keys)
    return {k for k in keys if k[5] == seed and k[3] == drifts}


def emit_report(out_dir, results=None, traces="first"):
    """Write ``plots/overview.svg`` and per-run trace SVGs into ``out_dir``.

    With ``results`` (in-memory run results) nothing is read back; otherwise
    ``summary.csv`` and ``results.csv`` are read from ``out_dir``.

    Returns:
        The plots directory.
    """
    from .experiment import read_summary

    out = Path(out_dir)
    plots = out / "plots"
    plots.mkdir(parents=True, exist_ok=True)
    if results is not None:
        rows = [r.summary for r in results]
        series = {r.config.key(): (r.bac, r.flags[:, 0], r.flags[:, 1]) for r in results}
        n_chunks = {r.config.key(): len(r.bac) for r in results}
        wanted = _select(list(series), traces)
    else:
        rows = read_summary(out / "summary.csv")
        wanted = _select([tuple(getattr(r, k) for k in RUN_KEYS) for r in rows], traces)
        series = _read_traces(out / "results.csv", wanted) if wanted else {}
        n_chunks = {k: len(v[0]) for k, v in series.items()}

    rows = sorted(rows, key=sort_key)
    table = aggregate(rows, ("framework", "detector", "classifier", "n_drifts", "delta"))
    (plots / "overview.svg").write_text(overview_svg(table))

    for key in sorted(wanted, key=lambda k: sort_key(dict(zip(RUN_KEYS, k)))):
        if key not in series:
            continue
        bac, req, tr = series[key]
        drifts = drift_points(StreamConfig(n_chunks=n_chunks[key], n_drifts=key[3]))
        title = f"{key[0]} + {key[1]} + {key[2]}, {key[3]} drifts, delta={key[4]}, seed {key[5]}"
        (plots / _trace_name(key)).write_text(trace_svg(bac, req, tr, drifts, title))
    return plots


def _read_traces(path, wanted):
    acc = defaultdict(lambda: ([], [], []))
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            key = (rec["framework"], rec["detector"], rec["classifier"], int(rec["n_drifts"]),
                   int(rec["delta"]), int(rec["seed"]))
            if key in wanted:
                b, q, t = acc[key]
                b.append(float(rec["bac"]))
                q.append(rec["label_request"] == "1")
                t.append(rec["trained"] == "1")
    return {k: (np.array(b), np.array(q), np.array(t)) for k, (b, q, t) in acc.items()}


__all__ = ["CRITERIA", "colour", "emit_report", "overview_svg", "trace_svg"]
