"""Command-line interface.

Subcommands: simulate, verify, transport, detect-islands, export.
Exit codes: 0 success, 1 invariant or verification failure, 2 configuration
or argument error, 3 I/O error.  Seed precedence: --seed flag, then the
BUNDLE_SEED environment variable, then the config file.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import artifacts
from .config import RunConfig
from .contour import Contour
from .errors import BundlewalkError, ConfigInvalid, DisjointPlanes, MissingArtifact
from .geometry import BundlePoint, Disc
from .orchestrate import simulate
from .topology import detect_islands
from .transport import directed_length, farthest_transport, reverse, shortest_transport
from .verify import verify_run

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bundlewalk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a simulation from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("verify", help="re-check all invariants of a finished run")
    p.add_argument("run_dir")

    p = sub.add_parser("transport", help="append transport records for two contours")
    p.add_argument("run_dir")
    p.add_argument("--from", dest="from_id", type=int, required=True)
    p.add_argument("--to", dest="to_id", type=int, required=True)
    p.add_argument("--resolution", type=int, default=200)

    p = sub.add_parser("detect-islands", help="detect islands inside a disc")
    p.add_argument("run_dir")
    p.add_argument("--disc", required=True, help="plane:cx:cy:r in plane-local coordinates")
    p.add_argument("--pitch", type=float, default=None, help="raster pitch (default radius/64)")

    p = sub.add_parser("export", help="re-render the snapshot or dump a summary CSV")
    p.add_argument("run_dir")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--svg", action="store_true")
    group.add_argument("--csv", action="store_true")
    return parser


def _load_contour(run: Path, report: dict, wid: int) -> Contour:
    events = artifacts.read_events(run / artifacts.EVENTS_FILE)
    info = report["walkers"].get(str(wid))
    if info is None:
        raise ConfigInvalid(f"walker {wid} does not exist in this run")
    c = Contour(wid)
    init = info["init"]
    c.append(
        BundlePoint(plane=init["plane"], local=complex(*init["local"]), global_=np.array(init["global"])),
        interval=-1,
    )
    for ev in events:
        if ev["walker"] != wid:
            continue
        c.append(
            BundlePoint(plane=ev["plane"], local=complex(*ev["chosen"]), global_=np.array(ev["global"])),
            interval=ev["k"],
        )
    return c


def cmd_simulate(args) -> int:
    config = RunConfig.from_file(args.config)
    seed = args.seed
    if seed is None and "BUNDLE_SEED" in os.environ:
        try:
            seed = int(os.environ["BUNDLE_SEED"])
        except ValueError:
            raise ConfigInvalid("BUNDLE_SEED must be an integer") from None
    if seed is not None:
        config = RunConfig({**config.data, "seed": seed})
    simulate(config, args.out)
    print(f"run written to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    failures = verify_run(args.run_dir)
    for failure in failures:
        print(f"FAIL {failure}")
    if failures:
        return EXIT_FAIL
    print("verify: all invariants hold")
    return EXIT_OK


def cmd_transport(args) -> int:
    run = Path(args.run_dir)
    report = artifacts.read_report(run / artifacts.REPORT_FILE)
    config = RunConfig.from_file(run / artifacts.CONFIG_FILE)
    bundle = config.build_bundle()
    s = _load_contour(run, report, args.from_id)
    s2 = _load_contour(run, report, args.to_id)
    line = bundle.line_between(s.points[0].plane, s2.points[0].plane)
    if line is None:
        raise DisjointPlanes("the contours' planes do not intersect")
    t, lengths = shortest_transport(s, s2, line, resolution=args.resolution)
    tf, lf = farthest_transport(s, s2, line, resolution=args.resolution)
    rev_t, rev_lengths = reverse(t, lengths)
    record = {
        "from": args.from_id,
        "to": args.to_id,
        "shortest": {
            "parts": [lengths.part1, lengths.part2, lengths.part3],
            "total": lengths.total,
            "anchor_from": t.anchor_from.tolist(),
            "via": t.via.tolist(),
            "via_exit": t.via_exit.tolist(),
            "anchor_to": t.anchor_to.tolist(),
        },
        "farthest": {
            "parts": [lf.part1, lf.part2, lf.part3],
            "total": lf.total,
        },
        "directed_forward": directed_length(s, t, lengths, s2),
        "directed_reverse": directed_length(s, rev_t, rev_lengths, s2),
        "full_endpoint_lengths": True,
    }
    report.setdefault("transports", []).append(record)
    artifacts.write_report(run / artifacts.REPORT_FILE, report)
    print(f"shortest total {lengths.total:.6g}, farthest total {lf.total:.6g}")
    return EXIT_OK


def _island_line_flags(bundle, plane_id: int, island) -> bool:
    """Whether any intersection line of the plane crosses the island cells."""
    plane = bundle.plane(plane_id)
    from .geometry import project

    for line in bundle.lines_of(plane_id):
        a, _ = project(plane, line.point)
        b, _ = project(plane, line.point + line.direction)
        d = b - a
        for cell in island.cells:
            z = island.cell_center(cell)
            # distance from cell center to the 2D line through a with direction d
            num = abs(d.real * (z.imag - a.imag) - d.imag * (z.real - a.real))
            den = abs(d)
            if den > 0 and num / den <= island.h:
                return True
    return False


def cmd_detect_islands(args) -> int:
    run = Path(args.run_dir)
    report = artifacts.read_report(run / artifacts.REPORT_FILE)
    config = RunConfig.from_file(run / artifacts.CONFIG_FILE)
    bundle = config.build_bundle()
    parts = args.disc.split(":")
    if len(parts) != 4:
        raise ConfigInvalid("--disc must be plane:cx:cy:r")
    plane_id, cx, cy, r = int(parts[0]), float(parts[1]), float(parts[2]), float(parts[3])
    disc = Disc(plane=plane_id, center=complex(cx, cy), radius=r)
    pitch = args.pitch if args.pitch is not None else r / 64.0
    segs = np.array(report.get("removal", {}).get("removed_segments", {}).get(str(plane_id), []))
    islands = detect_islands(disc, segs, pitch)
    for island in islands:
        report.setdefault("islands", []).append(
            {
                "plane": plane_id,
                "disc": [cx, cy, r],
                "pitch": pitch,
                "cells": sorted(island.cells),
                "crossed_by_intersection_line": _island_line_flags(bundle, plane_id, island),
            }
        )
    artifacts.write_report(run / artifacts.REPORT_FILE, report)
    print(f"{len(islands)} island(s) detected")
    return EXIT_OK


def cmd_export(args) -> int:
    run = Path(args.run_dir)
    report = artifacts.read_report(run / artifacts.REPORT_FILE)
    if args.csv:
        out = run / "summary.csv"
        lines = ["walker,vertices,final_length,multilevel,status"]
        for wid, info in sorted(report["walkers"].items(), key=lambda kv: int(kv[0])):
            lines.append(
                f"{wid},{info['vertices']},{artifacts.fnum(info['final_length'])},"
                f"{int(info['multilevel'])},{info['status']}"
            )
        out.write_text("\n".join(lines) + "\n")
        print(f"summary written to {out}")
        return EXIT_OK

    events = artifacts.read_events(run / artifacts.EVENTS_FILE)
    contours: dict[int, list] = {}
    for wid, info in report["walkers"].items():
        contours[int(wid)] = [info["init"]["global"]]
    for ev in events:
        contours[ev["walker"]].append(ev["global"])
    polylines = [(wid, np.array(pts)) for wid, pts in sorted(contours.items())]
    removed = []
    for pid, segs in report.get("removal", {}).get("removed_segments", {}).items():
        config = RunConfig.from_file(run / artifacts.CONFIG_FILE)
        bundle = config.build_bundle()
        plane = bundle.plane(int(pid))
        from .geometry import embed

        for ax, ay, bx, by in segs:
            removed.append(np.vstack([embed(plane, complex(ax, ay)), embed(plane, complex(bx, by))]))
    rects = []
    for island in report.get("islands", []):
        h = island["pitch"]
        cx, cy, r = island["disc"]
        for i, j in island["cells"]:
            rects.append((cx - r + i * h, cy - r + j * h, h, h))
    artifacts.write_snapshot(run / artifacts.SNAPSHOT_FILE, polylines, removed, rects)
    print(f"snapshot written to {run / artifacts.SNAPSHOT_FILE}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "transport": cmd_transport,
    "detect-islands": cmd_detect_islands,
    "export": cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigInvalid as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DisjointPlanes as e:
        print(f"argument error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingArtifact as e:
        print(f"missing artifact: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO
    except BundlewalkError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
