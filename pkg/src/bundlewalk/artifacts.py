"""Run-directory artifacts: event log (JSONL), metrics (CSV), report (JSON)
and the SVG snapshot.

events.jsonl and metrics.csv are the reproducibility surface: identical
config and seed must produce byte-identical files, so numbers are formatted
with 17 significant digits and field order is fixed by hand.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import MissingArtifact
from .walk import EventLog, StepEvent

EVENTS_FILE = "events.jsonl"
METRICS_FILE = "metrics.csv"
REPORT_FILE = "report.json"
SNAPSHOT_FILE = "snapshot.svg"
CONFIG_FILE = "config.json"

METRICS_HEADER = "interval,walker,F_rate,R_rate,dB,B,phi,phi3,phi4,status"


def fnum(x: float) -> str:
    return "%.17g" % float(x)


def event_line(ev: StepEvent) -> str:
    switched = "null" if ev.switched_plane is None else str(ev.switched_plane)
    g = ev.chosen.global_
    return (
        "{"
        f'"walker": {ev.walker}, "k": {ev.interval}, "plane": {ev.chosen.plane}, '
        f'"disc_center": [{fnum(ev.disc.center.real)}, {fnum(ev.disc.center.imag)}], '
        f'"radius": {fnum(ev.disc.radius)}, "switched_to": {switched}, '
        f'"chosen": [{fnum(ev.chosen.local.real)}, {fnum(ev.chosen.local.imag)}], '
        f'"global": [{fnum(g[0])}, {fnum(g[1])}, {fnum(g[2])}], '
        f'"rejections": {ev.rejections}'
        "}"
    )


def write_events(path: Path, log: EventLog) -> None:
    with open(path, "w") as fh:
        for ev in log.events:
            fh.write(event_line(ev) + "\n")


def read_events(path: Path) -> list[dict]:
    if not path.exists():
        raise MissingArtifact(f"missing {path.name}")
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]


def metrics_line(row) -> str:
    return ",".join(
        [
            str(row.interval),
            str(row.walker),
            fnum(row.f_rate),
            fnum(row.r_rate),
            fnum(row.db),
            fnum(row.backlog),
            fnum(row.phi),
            fnum(row.phi3),
            fnum(row.phi4),
            row.status,
        ]
    )


def write_metrics(path: Path, rows) -> None:
    with open(path, "w") as fh:
        fh.write(METRICS_HEADER + "\n")
        for row in rows:
            fh.write(metrics_line(row) + "\n")


def read_metrics(path: Path) -> list[dict]:
    if not path.exists():
        raise MissingArtifact(f"missing {path.name}")
    lines = path.read_text().splitlines()
    if not lines or lines[0] != METRICS_HEADER:
        raise MissingArtifact(f"{path.name} lacks the expected header")
    cols = METRICS_HEADER.split(",")
    out = []
    for line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split(",")
        row = dict(zip(cols, parts))
        for key in ("interval", "walker"):
            row[key] = int(row[key])
        for key in ("F_rate", "R_rate", "dB", "B", "phi", "phi3", "phi4"):
            row[key] = float(row[key])
        out.append(row)
    return out


def write_report(path: Path, report: dict) -> None:
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def read_report(path: Path) -> dict:
    if not path.exists():
        raise MissingArtifact(f"missing {path.name}")
    return json.loads(path.read_text())


# -- snapshot -----------------------------------------------------------------

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def _view(points: np.ndarray, axes: tuple[int, int]) -> np.ndarray:
    return points[:, list(axes)]


def _panel(polylines, removed, islands, axes, origin_x, scale, size, flip_y=True):
    """One orthographic panel as SVG fragments."""

    def to_svg(p):
        x = origin_x + (p[0]) * scale[0] + scale[1]
        y = size - (p[1] * scale[0] + scale[2]) if flip_y else p[1] * scale[0] + scale[2]
        return f"{x:.2f},{y:.2f}"

    frags = []
    for wid, pts in polylines:
        if pts.shape[0] < 2:
            continue
        path = " ".join(to_svg(q) for q in _view(pts, axes))
        color = PALETTE[wid % len(PALETTE)]
        frags.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.2"/>')
    for pts in removed:
        if pts.shape[0] < 2:
            continue
        path = " ".join(to_svg(q) for q in _view(pts, axes))
        frags.append(
            f'<polyline points="{path}" fill="none" stroke="#333333" stroke-width="1.6" stroke-dasharray="4 3"/>'
        )
    for x, y, w, h in islands:
        p0 = to_svg((x, y)).split(",")
        frags.append(
            f'<rect x="{p0[0]}" y="{float(p0[1]) - h * scale[0]:.2f}" width="{w * scale[0]:.2f}" '
            f'height="{h * scale[0]:.2f}" fill="#ffd54f" fill-opacity="0.6" stroke="none"/>'
        )
    return frags


def write_snapshot(
    path: Path,
    contours: list[tuple[int, np.ndarray]],
    removed_chains: list[np.ndarray],
    island_rects_local: list[tuple[float, float, float, float]] | None = None,
    size: int = 420,
) -> None:
    """Two orthographic views: along the bundle axis (y, z) and from above
    (x, y).  Contours colored per walker, removed chains dashed, island
    cells shaded (front view only; islands live in plane-local coordinates
    that the front view shares for parallel planes)."""

    all_pts = [pts for _, pts in contours if pts.shape[0]] + [c for c in removed_chains if c.shape[0]]
    if all_pts:
        stacked = np.vstack(all_pts)
        lo = stacked.min(axis=0) - 0.5
        hi = stacked.max(axis=0) + 0.5
    else:
        lo = np.array([-1.0, -1.0, -1.0])
        hi = np.array([1.0, 1.0, 1.0])

    def panel_scale(axes):
        span = max(hi[axes[0]] - lo[axes[0]], hi[axes[1]] - lo[axes[1]], 1e-9)
        s = (size - 20) / span
        return (s, 10 - lo[axes[0]] * s, 10 - lo[axes[1]] * s)

    front_axes = (1, 2)
    side_axes = (0, 1)
    frags = ['<?xml version="1.0" encoding="UTF-8"?>']
    frags.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{2 * size + 30}" height="{size + 30}" '
        f'viewBox="0 0 {2 * size + 30} {size + 30}">'
    )
    frags.append('<rect width="100%" height="100%" fill="white"/>')
    labels = [("front view (along bundle axis)", 10), ("side view", size + 30)]
    for text, x in labels:
        frags.append(f'<text x="{x}" y="{size + 22}" font-size="12" fill="#555">{text}</text>')
    frags.extend(_panel(contours, removed_chains, island_rects_local or [], front_axes, 0, panel_scale(front_axes), size))
    frags.extend(_panel(contours, removed_chains, [], side_axes, size + 20, panel_scale(side_axes), size))
    frags.append("</svg>")
    path.write_text("\n".join(frags) + "\n")
