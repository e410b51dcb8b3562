"""Simulation driver: advances all walkers interval by interval, applies
removal at the barrier, fires the plane-hole event when scheduled, and
writes the run artifacts.

Walkers advance in id order inside each interval, so identical config and
seed produce byte-identical event logs and metrics.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import artifacts
from .config import RunConfig
from .contour import Contour, is_multilevel
from .removal import RemovalLedger, RemovedSnapshot
from .walk import ACTIVE, EventLog, WalkerState, init_walker, step


class RunResult:
    def __init__(self):
        self.log = EventLog()
        self.contours: dict[int, Contour] = {}
        self.walkers: dict[int, WalkerState] = {}
        self.ledger: RemovalLedger | None = None
        self.partition_report = None
        self.report: dict = {}


def simulate(config: RunConfig, out_dir: str | Path) -> RunResult:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    bundle = config.build_bundle()
    removal_cfg = config.removal_config()
    result = RunResult()
    ledger = RemovalLedger(removal_cfg) if removal_cfg else None
    result.ledger = ledger

    n_walkers = config.data["walkers"]["count"]
    for wid in range(n_walkers):
        spec = config.walker_spec(wid)
        cfg = config.walker_config(wid)
        if spec["start_transversal"] is not None:
            plane = bundle.transversal_planes()[int(spec["start_transversal"])]
        else:
            plane = bundle.parallel_by_offset(float(spec["start_plane_offset"]))
        z0 = spec["z0"]
        w = init_walker(
            cfg,
            bundle,
            plane.id,
            z0=complex(z0[0], z0[1]) if z0 is not None else None,
            box=tuple(spec["box"]),
            walker_id=wid,
        )
        result.walkers[wid] = w
        result.log.init_points[wid] = w.current
        contour = Contour(wid)
        contour.append(w.current, interval=-1)
        result.contours[wid] = contour
        if ledger:
            ledger.track(wid, contour)

    horizon = config.data["horizon"]
    ph = config.data["removal"]["plane_hole"] if removal_cfg else None
    snapshot: RemovedSnapshot | None = None

    for k in range(horizon):
        for wid in sorted(result.walkers):
            w = result.walkers[wid]
            formed = 0.0
            if w.status == ACTIVE:
                ev = step(w, bundle, snapshot)
                if ev is not None:
                    result.log.append(ev)
                    result.contours[wid].append(ev.chosen, interval=ev.interval)
                    formed = float(np.linalg.norm(result.contours[wid].globals[-1] - result.contours[wid].globals[-2]))
            if ledger:
                ledger.record_formation(wid, k, formed)

        if ledger:
            ids = sorted(result.walkers)
            for a in ids:
                for b in ids:
                    if a != b:
                        ledger.register_shared(a, b)
            for wid in ids:
                amount = ledger.plan_interval(wid, k)
                if amount > 0.0:
                    ledger.apply_removal(wid, amount, k)
            if ph is not None and k == int(ph["at_interval"]):
                plane = bundle.parallel_by_offset(float(ph["plane_offset"]))
                result.partition_report = ledger.plane_hole_event(
                    bundle, plane.id, result.walkers, k, psi=ph.get("psi")
                )
            if ledger.partition is not None:
                survivors = sorted(ledger.partition.side_of)
                if len(survivors) >= 2:
                    ledger.pde_grid_step(survivors[0], survivors[1], k)
            for wid in ids:
                ledger.measure_step(wid, k, status=result.walkers[wid].status)
            snapshot = ledger.snapshot()

    _write_artifacts(config, result, out)
    return result


def _write_artifacts(config: RunConfig, result: RunResult, out: Path) -> None:
    config.echo(out / artifacts.CONFIG_FILE)
    artifacts.write_events(out / artifacts.EVENTS_FILE, result.log)
    artifacts.write_metrics(out / artifacts.METRICS_FILE, result.ledger.rows if result.ledger else [])
    report = build_report(config, result)
    result.report = report
    artifacts.write_report(out / artifacts.REPORT_FILE, report)
    removed_chains = []
    if result.ledger:
        for wid in sorted(result.ledger.walkers):
            removed_chains.extend(result.ledger.removed_chains(wid))
    artifacts.write_snapshot(
        out / artifacts.SNAPSHOT_FILE,
        [(wid, c.globals) for wid, c in sorted(result.contours.items())],
        removed_chains,
    )


def build_report(config: RunConfig, result: RunResult) -> dict:
    walkers = {}
    for wid, c in sorted(result.contours.items()):
        w = result.walkers[wid]
        init = result.log.init_points[wid]
        walkers[str(wid)] = {
            "init": {"plane": init.plane, "local": [init.local.real, init.local.imag],
                     "global": [float(x) for x in init.global_]},
            "final_length": c.total_length(),
            "vertices": len(c),
            "multilevel": is_multilevel(c),
            "status": w.status,
        }
    report = {"walkers": walkers, "transports": [], "islands": []}
    if result.ledger:
        removal = {
            "formed_total": {str(w): wl.formed_total() for w, wl in sorted(result.ledger.walkers.items())},
            "removed_total": {str(w): wl.removed_total() for w, wl in sorted(result.ledger.walkers.items())},
            "backlog": {str(w): wl.backlog for w, wl in sorted(result.ledger.walkers.items())},
            "primary_removed": result.ledger.primary_removed_total(),
            "bookings": result.ledger.booking_totals(),
            "clips": len(result.ledger.clips),
            "removed_segments": {
                str(pid): segs.tolist() for pid, segs in sorted(result.ledger.removed_segments_by_plane().items())
            },
        }
        report["removal"] = removal
        if result.partition_report:
            pr = result.partition_report
            report["partition"] = {
                "alpha1": pr.alpha1,
                "alpha2": pr.alpha2,
                "counts": {"total": pr.n_total, "halted": pr.n_halted, "above": pr.n_above, "below": pr.n_below},
                "count_identity": pr.count_identity(),
                "decompositions": {str(w): list(d) for w, d in sorted(pr.decompositions.items())},
                "lengths_at_event": {str(w): v for w, v in sorted(pr.lengths_at_event.items())},
                "fired_at": result.ledger.partition.fired_at,
            }
    report["invariants"] = _inline_invariants(result)
    return report


def _inline_invariants(result: RunResult) -> dict:
    """Cheap self-checks embedded into the report; `verify` recomputes the
    full set from the written artifacts."""
    checks = {}
    ok = True
    for ev in result.log.events:
        if not abs(ev.chosen.local - ev.disc.center) < ev.disc.radius:
            ok = False
            break
    checks["disc_membership"] = ok
    if result.ledger:
        checks["backlog_nonnegative"] = all(wl.backlog >= -1e-12 for wl in result.ledger.walkers.values())
        checks["removed_within_formed"] = all(
            wl.removed_total() <= wl.formed_total() + 1e-9 for wl in result.ledger.walkers.values()
        )
    return checks
