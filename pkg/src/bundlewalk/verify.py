"""Re-check every stored invariant of a finished run from its artifacts.

The verifier trusts nothing in the report: it rebuilds the bundle from the
echoed config, replays the geometric checks over events.jsonl, re-sums the
metrics, and compares the report's figures against its own recomputation.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import numpy as np

from . import artifacts
from .config import RunConfig
from .errors import MissingArtifact
from .geometry import embed

DISTINCTNESS_SCAN_CAP = 1000


def verify_run(run_dir: str | Path) -> list[str]:
    """Returns a list of human-readable violations (empty = pass)."""
    run = Path(run_dir)
    for name in (artifacts.CONFIG_FILE, artifacts.EVENTS_FILE, artifacts.METRICS_FILE, artifacts.REPORT_FILE):
        if not (run / name).exists():
            raise MissingArtifact(f"run directory lacks {name}")

    config = RunConfig.from_file(run / artifacts.CONFIG_FILE)
    bundle = config.build_bundle()
    events = artifacts.read_events(run / artifacts.EVENTS_FILE)
    metrics = artifacts.read_metrics(run / artifacts.METRICS_FILE)
    report = artifacts.read_report(run / artifacts.REPORT_FILE)

    failures: list[str] = []
    by_walker: dict[int, list[dict]] = defaultdict(list)
    for ev in events:
        by_walker[ev["walker"]].append(ev)

    for wid, evs in sorted(by_walker.items()):
        cfg = config.walker_config(wid)
        for pos, ev in enumerate(evs):
            tag = f"walker {wid} k={ev['k']}"
            if ev["k"] != pos:
                failures.append(f"{tag}: interval indices not contiguous (expected {pos})")
                break
            center = complex(*ev["disc_center"])
            chosen = complex(*ev["chosen"])
            if not abs(chosen - center) < ev["radius"]:
                failures.append(f"{tag}: chosen point outside its disc")
            plane = bundle.plane(ev["plane"])
            g = np.array(ev["global"])
            if np.linalg.norm(g - embed(plane, chosen)) > 1e-9:
                failures.append(f"{tag}: global coordinates disagree with the local embedding")
            if ev["rejections"] > cfg.max_rejections:
                failures.append(f"{tag}: rejections exceed max_rejections")

        init = report["walkers"].get(str(wid), {}).get("init")
        points = []
        planes = []
        if init is not None:
            points.append(init["global"])
            planes.append(init["plane"])
        points.extend(ev["global"] for ev in evs)
        planes.extend(ev["plane"] for ev in evs)
        pts = np.array(points)

        for pos, ev in enumerate(evs):
            if ev["switched_to"] is None:
                continue
            prev_plane = planes[pos]
            if ev["plane"] != ev["switched_to"]:
                failures.append(f"walker {wid} k={ev['k']}: switched event landed on the wrong plane")
            line = bundle.line_between(prev_plane, ev["switched_to"])
            if line is None:
                failures.append(f"walker {wid} k={ev['k']}: switch between non-intersecting planes")
            elif line.distance_to(pts[pos]) >= cfg.eps_int:
                failures.append(f"walker {wid} k={ev['k']}: switch while off the intersection line")

        scan = pts[:DISTINCTNESS_SCAN_CAP]
        if scan.shape[0] >= 2 and not cfg.allow_revisit:
            diff = scan[:, None, :] - scan[None, :, :]
            d2 = np.einsum("ijk,ijk->ij", diff, diff)
            np.fill_diagonal(d2, np.inf)
            if float(np.sqrt(d2.min())) < cfg.eps_dist:
                failures.append(f"walker {wid}: two vertices within eps_dist")

        rep = report["walkers"].get(str(wid))
        if rep is None:
            failures.append(f"walker {wid}: missing from report")
            continue
        if len(pts) >= 2:
            length = float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())
        else:
            length = 0.0
        if abs(length - rep["final_length"]) > 1e-9:
            failures.append(f"walker {wid}: report length {rep['final_length']} != recomputed {length}")
        if rep["vertices"] != len(pts):
            failures.append(f"walker {wid}: report vertex count {rep['vertices']} != {len(pts)}")
        multilevel = len({p for p in planes}) >= 2
        if rep["multilevel"] != multilevel:
            failures.append(f"walker {wid}: report multilevel flag disagrees with the log")

    failures.extend(_verify_metrics(metrics, report))
    return failures


def _verify_metrics(metrics: list[dict], report: dict) -> list[str]:
    failures = []
    per_walker: dict[int, list[dict]] = defaultdict(list)
    for row in metrics:
        per_walker[row["walker"]].append(row)
    for wid, rows in sorted(per_walker.items()):
        rows.sort(key=lambda r: r["interval"])
        cum_f = cum_r = sum_db = 0.0
        for row in rows:
            tag = f"metrics walker {wid} k={row['interval']}"
            if row["dB"] != row["F_rate"] - row["R_rate"]:
                failures.append(f"{tag}: dB != F_rate - R_rate")
            if row["B"] < -1e-12:
                failures.append(f"{tag}: negative backlog")
            cum_f += row["F_rate"]
            cum_r += row["R_rate"]
            sum_db += row["dB"]
            if cum_r > cum_f + 1e-9:
                failures.append(f"{tag}: cumulative removal exceeds cumulative formation")
        if rows and abs(sum_db - rows[-1]["B"]) > 1e-9:
            failures.append(f"metrics walker {wid}: dB series does not telescope to the final backlog")
        removal = report.get("removal")
        if removal is not None and rows:
            rep_f = removal["formed_total"].get(str(wid))
            if rep_f is not None and abs(rep_f - cum_f) > 1e-9:
                failures.append(f"metrics walker {wid}: formed total disagrees with report")
            rep_r = removal["removed_total"].get(str(wid))
            if rep_r is not None and abs(rep_r - cum_r) > 1e-9:
                failures.append(f"metrics walker {wid}: removed total disagrees with report")
    return failures
