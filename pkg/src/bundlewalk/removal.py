"""Interval-scheduled removal of contour data and the resulting measure
dynamics.

Removal consumes each walker's oldest unremoved arc length first, tracked as
half-open intervals over the contour's cumulative arc length.  Per-interval
rows record formation rate, removal rate, their difference dB and the
running backlog B; the never-stable and conservation properties are stated
over these rows.  Segments claimed by two walkers (within eps_share) form a
shared registry: removing a shared piece books it once, under the remover's
class, and deletes the mirrored piece from the partner.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contour import Contour, RegionPartition, plane_decomposition
from .errors import NotPartitioned, UnknownPlane
from .geometry import Bundle, PlaneId
from .walk import ACTIVE, HALTED_PLANE_HOLE, WalkerState

PURE = "pure"
SHARED_FIRST = "shared_first"
SHARED_SECOND = "shared_second"


@dataclass(frozen=True)
class RemovalConfig:
    """Window length (in walk intervals), start interval, and the mode:
    "full_window" removes a whole window's formation at each window boundary;
    "fraction" removes psi times the trailing window's formation every
    interval."""

    window: int = 1
    start: int = 0
    mode: str = "fraction"
    psi: float = 0.5
    eps_share: float = 1e-9

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be a positive number of intervals")
        if self.mode not in ("fraction", "full_window"):
            raise ValueError(f"unknown removal mode {self.mode!r}")
        if self.mode == "fraction" and not (0.0 < self.psi < 1.0):
            raise ValueError("fraction mode needs 0 < psi < 1")


class IntervalSet:
    """Sorted disjoint half-open intervals over a contour's arc length."""

    def __init__(self):
        self.ivs: list[tuple[float, float]] = []

    def total(self) -> float:
        return sum(b - a for a, b in self.ivs)

    def add(self, a: float, b: float) -> float:
        """Cover [a, b); returns the newly covered measure."""
        if b <= a:
            return 0.0
        new = b - a - self.overlap(a, b)
        merged = []
        lo, hi = a, b
        for x, y in self.ivs:
            if y < lo or x > hi:
                merged.append((x, y))
            else:
                lo, hi = min(lo, x), max(hi, y)
        merged.append((lo, hi))
        merged.sort()
        self.ivs = merged
        return new

    def overlap(self, a: float, b: float) -> float:
        return sum(max(0.0, min(b, y) - max(a, x)) for x, y in self.ivs)

    def gaps(self, lo: float, hi: float):
        """Uncovered sub-intervals of [lo, hi), in order."""
        cur = lo
        for x, y in self.ivs:
            if y <= cur:
                continue
            if x >= hi:
                break
            if x > cur:
                yield (cur, min(x, hi))
            cur = max(cur, y)
            if cur >= hi:
                return
        if cur < hi:
            yield (cur, hi)

    def covers(self, a: float, b: float, tol: float = 1e-12) -> bool:
        return self.overlap(a, b) >= (b - a) - tol


@dataclass
class SharedLink:
    """One segment claimed by two contours: [a_lo, a_hi) on the owner's arc
    length maps linearly onto [b_lo, b_hi) on the partner's."""

    owner: int
    partner: int
    a_lo: float
    a_hi: float
    b_lo: float
    b_hi: float

    def map_to_partner(self, x: float, y: float) -> tuple[float, float]:
        span = self.a_hi - self.a_lo
        if span <= 0.0:
            return (self.b_lo, self.b_lo)
        f0 = (x - self.a_lo) / span
        f1 = (y - self.a_lo) / span
        p0 = self.b_lo + f0 * (self.b_hi - self.b_lo)
        p1 = self.b_lo + f1 * (self.b_hi - self.b_lo)
        return (min(p0, p1), max(p0, p1))


@dataclass
class WalkerLedger:
    contour: Contour
    formed: list[float] = field(default_factory=list)
    removed: IntervalSet = field(default_factory=IntervalSet)
    removed_per_interval: dict[int, float] = field(default_factory=dict)
    bookings: dict[int, dict[str, float]] = field(default_factory=dict)
    links: list[SharedLink] = field(default_factory=list)
    scanned_vs: dict[int, int] = field(default_factory=dict)
    backlog: float = 0.0
    mirrored: float = 0.0
    phi_history: list[float] = field(default_factory=list)

    def formed_total(self) -> float:
        return sum(self.formed)

    def removed_total(self) -> float:
        return self.removed.total()

    def formed_in_window(self, k: int, window: int) -> float:
        lo = max(0, k - window + 1)
        return sum(self.formed[lo : k + 1])

    def book(self, k: int, cls: str, amount: float) -> None:
        row = self.bookings.setdefault(k, {})
        row[cls] = row.get(cls, 0.0) + amount

    def shared_intervals(self) -> list[tuple[float, float, SharedLink]]:
        return [(l.a_lo, l.a_hi, l) for l in self.links]


@dataclass
class MeasureRow:
    interval: int
    walker: int
    f_rate: float
    r_rate: float
    db: float
    backlog: float
    phi: float
    phi3: float
    phi4: float
    status: str


@dataclass
class PartitionState:
    hole_plane: PlaneId
    hole_offset: float
    fired_at: int
    partition: RegionPartition
    region_intervals: dict[int, dict[str, list[tuple[float, float]]]]
    side_of: dict[int, str]
    measure_above: float
    measure_below: float
    psi: float


@dataclass
class PartitionReport:
    alpha1: float
    alpha2: float
    n_total: int
    n_halted: int
    n_above: int
    n_below: int
    decompositions: dict[int, tuple[float, float, float]]
    lengths_at_event: dict[int, float]

    def count_identity(self) -> bool:
        """Exact count bookkeeping: survivors split into above + below."""
        return (self.n_total - self.n_halted) == (self.n_above + self.n_below)


class RemovalLedger:
    """Single-writer accounting of formation and removal for all walkers."""

    def __init__(self, cfg: RemovalConfig):
        self.cfg = cfg
        self.walkers: dict[int, WalkerLedger] = {}
        self.rows: list[MeasureRow] = []
        self.clips: list[tuple[int, int, float, float]] = []
        self.partition: PartitionState | None = None

    def track(self, walker: int, contour: Contour) -> WalkerLedger:
        wl = WalkerLedger(contour=contour)
        self.walkers[walker] = wl
        return wl

    def record_formation(self, walker: int, k: int, formed: float) -> float:
        """Account the length formed at interval k (0 when the walker
        produced nothing)."""
        wl = self.walkers[walker]
        while len(wl.formed) <= k:
            wl.formed.append(0.0)
        wl.formed[k] = float(formed)
        wl.backlog += float(formed)
        return float(formed)

    # -- planning ---------------------------------------------------------

    def plan_interval(self, walker: int, k: int) -> float:
        """Removal amount for interval k: the trailing window's formed length
        (full_window, at window boundaries) or psi times it (fraction, every
        interval); clipped to the unremoved backlog."""
        cfg = self.cfg
        if k < cfg.start:
            return 0.0
        wl = self.walkers[walker]
        window_formed = wl.formed_in_window(k, cfg.window)
        if cfg.mode == "fraction":
            planned = cfg.psi * window_formed
        else:
            planned = window_formed if (k - cfg.start) % cfg.window == 0 else 0.0
        return min(planned, wl.backlog)

    # -- application ------------------------------------------------------

    def apply_removal(self, walker: int, amount: float, k: int, restrict=None) -> list[tuple[float, float]]:
        """Remove ``amount`` of the walker's oldest unremoved arc length.

        ``restrict`` optionally limits consumption to a list of arc-length
        intervals (used for the opposite-half tail removal after a plane-hole
        event).  Returns the newly removed pieces.  Amounts beyond the
        backlog are clipped and the clip is logged.
        """
        if amount < 0.0:
            raise ValueError("removal amount must be non-negative")
        wl = self.walkers[walker]
        total_len = float(wl.contour.cumulative_lengths()[-1]) if len(wl.contour) else 0.0
        regions = restrict if restrict is not None else [(0.0, total_len)]
        available = sum(
            y - x for lo, hi in regions for x, y in wl.removed.gaps(lo, hi)
        )
        if amount > available + 1e-15:
            self.clips.append((k, walker, amount, available))
            amount = available
        remaining = amount
        pieces: list[tuple[float, float]] = []
        for lo, hi in regions:
            if remaining <= 1e-15:
                break
            for x, y in list(wl.removed.gaps(lo, hi)):
                if remaining <= 1e-15:
                    break
                take = min(y - x, remaining)
                piece = (x, x + take)
                self._remove_piece(walker, piece, k)
                pieces.append(piece)
                remaining -= take
        return pieces

    def _remove_piece(self, walker: int, piece: tuple[float, float], k: int) -> None:
        """Mark one piece removed, booking pure vs shared parts and mirroring
        shared sub-pieces onto partners."""
        wl = self.walkers[walker]
        x, y = piece
        cuts = {x, y}
        for a_lo, a_hi, _ in wl.shared_intervals():
            if a_lo < y and a_hi > x:
                cuts.add(max(a_lo, x))
                cuts.add(min(a_hi, y))
        bounds = sorted(cuts)
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            if hi <= lo:
                continue
            new = wl.removed.add(lo, hi)
            if new <= 0.0:
                continue
            wl.backlog -= new
            wl.removed_per_interval[k] = wl.removed_per_interval.get(k, 0.0) + new
            link = next(
                (l for a_lo, a_hi, l in wl.shared_intervals() if a_lo <= lo and hi <= a_hi),
                None,
            )
            if link is None:
                wl.book(k, PURE, new)
                continue
            cls = SHARED_FIRST if walker <= link.partner else SHARED_SECOND
            wl.book(k, cls, new)
            # Mirror deletion: the partner loses the same point set but books
            # nothing (the shared piece counts once).
            p_lo, p_hi = link.map_to_partner(lo, hi)
            partner = self.walkers[link.partner]
            mirrored = partner.removed.add(p_lo, p_hi)
            if mirrored > 0.0:
                partner.backlog -= mirrored
                partner.mirrored += mirrored
                partner.removed_per_interval[k] = partner.removed_per_interval.get(k, 0.0) + mirrored

    # -- shared-segment registry ------------------------------------------

    def register_shared(self, a: int, b: int) -> int:
        """Scan walker a's unregistered segments against walker b's polyline;
        both endpoints within eps_share registers a shared link.  Returns the
        number of new links."""
        from .transport import point_to_polyline

        wa = self.walkers[a]
        wb = self.walkers[b]
        if len(wb.contour) < 2 or len(wa.contour) < 2:
            return 0
        start = wa.scanned_vs.get(b, 0)
        n_segs = len(wa.contour) - 1
        if start >= n_segs:
            return 0
        wa.scanned_vs[b] = n_segs
        eps = self.cfg.eps_share
        pts_a = wa.contour.globals
        pts_b = wb.contour.globals
        bb_lo = pts_b.min(axis=0) - eps
        bb_hi = pts_b.max(axis=0) + eps
        fresh = pts_a[start : n_segs + 1]
        inside = np.all((fresh >= bb_lo) & (fresh <= bb_hi), axis=1)
        if not bool(np.any(inside[:-1] & inside[1:])):
            return 0
        cum_a = wa.contour.cumulative_lengths()
        cum_b = wb.contour.cumulative_lengths()
        added = 0
        for i in range(start, n_segs):
            if not (inside[i - start] and inside[i - start + 1]):
                continue
            d0, c0 = point_to_polyline(pts_b, pts_a[i])
            d1, c1 = point_to_polyline(pts_b, pts_a[i + 1])
            if d0 < eps and d1 < eps:
                s0 = _arclen_position(pts_b, cum_b, c0)
                s1 = _arclen_position(pts_b, cum_b, c1)
                wa.links.append(
                    SharedLink(owner=a, partner=b, a_lo=float(cum_a[i]), a_hi=float(cum_a[i + 1]), b_lo=s0, b_hi=s1)
                )
                added += 1
        return added

    # -- per-interval measure ---------------------------------------------

    def measure_step(self, walker: int, k: int, status: str = ACTIVE) -> MeasureRow:
        wl = self.walkers[walker]
        f = wl.formed[k] if k < len(wl.formed) else 0.0
        r = wl.removed_per_interval.get(k, 0.0)
        books = wl.bookings.get(k, {})
        phi = books.get(PURE, 0.0)
        wl.phi_history.append(phi)
        row = MeasureRow(
            interval=k,
            walker=walker,
            f_rate=f,
            r_rate=r,
            db=f - r,
            backlog=wl.backlog,
            phi=phi,
            phi3=books.get(SHARED_FIRST, 0.0),
            phi4=books.get(SHARED_SECOND, 0.0),
            status=status,
        )
        self.rows.append(row)
        return row

    def booking_totals(self) -> dict[str, float]:
        out = {PURE: 0.0, SHARED_FIRST: 0.0, SHARED_SECOND: 0.0}
        for wl in self.walkers.values():
            for books in wl.bookings.values():
                for cls, amt in books.items():
                    out[cls] = out.get(cls, 0.0) + amt
        return out

    def four_part_rates(self, first: int, second: int) -> dict[str, float]:
        """Totals of the four removal classes for a walker pair: pure first
        (phi), pure second (phi'), shared removed by first (phi3), shared
        removed by second (phi4)."""
        out = {"phi": 0.0, "phi_prime": 0.0, "phi3": 0.0, "phi4": 0.0}
        for wid, wl in self.walkers.items():
            for books in wl.bookings.values():
                out["phi" if wid == first else "phi_prime"] += books.get(PURE, 0.0)
                out["phi3"] += books.get(SHARED_FIRST, 0.0)
                out["phi4"] += books.get(SHARED_SECOND, 0.0)
        return out

    def primary_removed_total(self) -> float:
        """Total removed length counting shared pieces once: the union
        measure, computed from the interval sets rather than the bookings."""
        return sum(wl.removed.total() - wl.mirrored for wl in self.walkers.values())

    # -- removed chains -----------------------------------------------------

    def removed_chains(self, walker: int) -> list[np.ndarray]:
        """Materialize the walker's removed pieces as 3-space polylines."""
        wl = self.walkers[walker]
        return [
            _slice_polyline(wl.contour.globals, wl.contour.cumulative_lengths(), a, b)
            for a, b in wl.removed.ivs
            if b > a
        ]

    def removed_segments_by_plane(self) -> dict[PlaneId, np.ndarray]:
        """Removed sub-segments grouped by the plane each belongs to, in that
        plane's local 2D coordinates: (n, 4) arrays of (ax, ay, bx, by)."""
        out: dict[PlaneId, list[tuple[float, float, float, float]]] = {}
        for wid, wl in self.walkers.items():
            c = wl.contour
            if len(c) < 2:
                continue
            cum = c.cumulative_lengths()
            for a, b in wl.removed.ivs:
                for i, (sa, sb) in _covered_subsegments(cum, a, b):
                    p = c.points[i]
                    q = c.points[i + 1]
                    seg_len = cum[i + 1] - cum[i]
                    if seg_len <= 0.0:
                        continue
                    f0 = (sa - cum[i]) / seg_len
                    f1 = (sb - cum[i]) / seg_len
                    za = p.local + f0 * (q.local - p.local)
                    zb = p.local + f1 * (q.local - p.local)
                    # Local interpolation is only valid when both ends share
                    # the segment's plane; cross-plane hops are one step wide
                    # and contribute their start-plane shadow.
                    out.setdefault(c.segment_plane(i), []).append((za.real, za.imag, zb.real, zb.imag))
        return {pid: np.array(rows, dtype=np.float64) for pid, rows in out.items()}

    def snapshot(self) -> "RemovedSnapshot":
        return RemovedSnapshot(self.removed_segments_by_plane())

    # -- plane-hole event ---------------------------------------------------

    def plane_hole_event(
        self,
        bundle: Bundle,
        plane: PlaneId,
        walkers: dict[int, WalkerState],
        k: int,
        psi: float | None = None,
        tol: float = 1e-9,
    ) -> PartitionReport:
        """Delete an entire plane: halt the walkers sitting on it, split the
        survivors into above/below sub-bundles, decompose each survivor's
        length by region and schedule the opposite-half tails for removal."""
        hole = bundle.plane(plane)
        if hole.kind != "parallel":
            raise UnknownPlane("plane-hole events target a parallel plane")
        offset = hole.offset
        above_ids = frozenset(p.id for p in bundle.parallel_planes() if p.offset > offset + tol)
        below_ids = frozenset(p.id for p in bundle.parallel_planes() if p.offset < offset - tol)
        trans_above = frozenset(p.id for p in bundle.transversal_planes() if p.pivot_offset > offset)
        trans_below = frozenset(p.id for p in bundle.transversal_planes() if p.pivot_offset <= offset)
        part = RegionPartition(in_plane=plane, above=above_ids | trans_above, below=below_ids | trans_below)

        axis_coord = lambda w: float(w.current.global_[0])
        n_total = len(walkers)
        halted, above, below = [], [], []
        for wid in sorted(walkers):
            w = walkers[wid]
            if abs(axis_coord(w) - offset) <= tol:
                w.status = HALTED_PLANE_HOLE
                halted.append(wid)
            elif axis_coord(w) > offset:
                above.append(wid)
            else:
                below.append(wid)

        decomps: dict[int, tuple[float, float, float]] = {}
        lengths_at_event: dict[int, float] = {}
        region_intervals: dict[int, dict[str, list[tuple[float, float]]]] = {}
        side_of: dict[int, str] = {}
        measure_above = measure_below = 0.0
        for wid in sorted(walkers):
            wl = self.walkers.get(wid)
            if wl is None or len(wl.contour) < 2:
                decomps[wid] = (0.0, 0.0, 0.0)
                lengths_at_event[wid] = 0.0
                region_intervals[wid] = {"in": [], "above": [], "below": []}
                continue
            decomps[wid] = plane_decomposition(wl.contour, part)
            lengths_at_event[wid] = wl.contour.total_length()
            ivs = {"in": [], "above": [], "below": []}
            cum = wl.contour.cumulative_lengths()
            for i in range(len(wl.contour) - 1):
                region = part.region_of(wl.contour.segment_plane(i))
                ivs[region].append((float(cum[i]), float(cum[i + 1])))
            region_intervals[wid] = ivs
            for a, b in ivs["above"]:
                measure_above += (b - a) - wl.removed.overlap(a, b)
            for a, b in ivs["below"]:
                measure_below += (b - a) - wl.removed.overlap(a, b)
        for wid in above:
            side_of[wid] = "above"
        for wid in below:
            side_of[wid] = "below"

        self.partition = PartitionState(
            hole_plane=plane,
            hole_offset=offset,
            fired_at=k,
            partition=part,
            region_intervals=region_intervals,
            side_of=side_of,
            measure_above=measure_above,
            measure_below=measure_below,
            psi=self.cfg.psi if psi is None else psi,
        )
        n_active = n_total - len(halted)
        return PartitionReport(
            alpha1=len(halted) / n_total if n_total else 0.0,
            alpha2=len(above) / n_active if n_active else 0.0,
            n_total=n_total,
            n_halted=len(halted),
            n_above=len(above),
            n_below=len(below),
            decompositions=decomps,
            lengths_at_event=lengths_at_event,
        )

    def pde_grid_step(self, walker_a: int, walker_b: int, k: int) -> dict[str, float]:
        """One interval of the coupled two-walker tail removal after a
        plane-hole event.

        Each walker's removal term drains psi times the remaining unremoved
        tail in the half opposite its active side; the two half measures
        evolve independently.  Returns the per-walker decrements and the
        updated half measures.
        """
        if self.partition is None:
            raise NotPartitioned("pde_grid_step requires a prior plane_hole_event")
        ps = self.partition
        placements = {
            ("above", "above"): "both_above",
            ("above", "below"): "split",
            ("below", "below"): "both_below",
            ("below", "above"): "split_reversed",
        }
        placement = placements.get((ps.side_of.get(walker_a), ps.side_of.get(walker_b)))
        decrements: dict[int, float] = {}
        for wid in (walker_a, walker_b):
            side = ps.side_of.get(wid)
            if side is None:
                decrements[wid] = 0.0
                continue
            opposite = "below" if side == "above" else "above"
            regions = ps.region_intervals[wid][opposite]
            wl = self.walkers[wid]
            remaining = sum(y - x for lo, hi in regions for x, y in wl.removed.gaps(lo, hi))
            amount = ps.psi * remaining
            removed = 0.0
            if amount > 0.0:
                pieces = self.apply_removal(wid, amount, k, restrict=regions)
                removed = sum(b - a for a, b in pieces)
            decrements[wid] = removed
            if opposite == "above":
                ps.measure_above -= removed
            else:
                ps.measure_below -= removed
        return {
            "placement": placement,
            "removed_a": decrements[walker_a],
            "removed_b": decrements[walker_b],
            "measure_above": ps.measure_above,
            "measure_below": ps.measure_below,
        }


class RemovedSnapshot:
    """Frozen view of removed chains for the walkers to read while stepping."""

    def __init__(self, by_plane: dict[PlaneId, np.ndarray]):
        self.by_plane = by_plane

    def blocked(self, plane: PlaneId, z_from: complex, z_to: complex) -> bool:
        segs = self.by_plane.get(plane)
        if segs is None or segs.shape[0] == 0:
            return False
        return _segment_hits_any(
            z_from.real, z_from.imag, z_to.real, z_to.imag, segs
        )


def _segment_hits_any(px, py, qx, qy, segs: np.ndarray) -> bool:
    ax, ay, bx, by = segs[:, 0], segs[:, 1], segs[:, 2], segs[:, 3]
    d1 = (qx - px) * (ay - py) - (qy - py) * (ax - px)
    d2 = (qx - px) * (by - py) - (qy - py) * (bx - px)
    d3 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    d4 = (bx - ax) * (qy - ay) - (by - ay) * (qx - ax)
    proper = (d1 * d2 < 0.0) & (d3 * d4 < 0.0)
    if bool(np.any(proper)):
        return True
    # Touching counts as blocked: removed points are unavailable.
    eps = 1e-12
    touch = (np.abs(d1) <= eps) | (np.abs(d2) <= eps) | (np.abs(d3) <= eps) | (np.abs(d4) <= eps)
    if not bool(np.any(touch)):
        return False
    for i in np.nonzero(touch)[0]:
        if _collinear_overlap(px, py, qx, qy, *segs[i]):
            return True
    return False


def _collinear_overlap(px, py, qx, qy, ax, ay, bx, by) -> bool:
    def on_seg(x, y, x1, y1, x2, y2):
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        if abs(cross) > 1e-12 * max(1.0, abs(x2 - x1) + abs(y2 - y1)):
            return False
        return min(x1, x2) - 1e-12 <= x <= max(x1, x2) + 1e-12 and min(y1, y2) - 1e-12 <= y <= max(y1, y2) + 1e-12

    return (
        on_seg(ax, ay, px, py, qx, qy)
        or on_seg(bx, by, px, py, qx, qy)
        or on_seg(px, py, ax, ay, bx, by)
        or on_seg(qx, qy, ax, ay, bx, by)
    )


def _covered_subsegments(cum: np.ndarray, a: float, b: float):
    """Yield (segment index, (lo, hi)) for the parts of [a, b) on each
    polyline segment."""
    n = len(cum) - 1
    i = int(np.searchsorted(cum, a, side="right")) - 1
    i = max(0, min(i, n - 1))
    while i < n and cum[i] < b:
        lo = max(a, float(cum[i]))
        hi = min(b, float(cum[i + 1]))
        if hi > lo:
            yield i, (lo, hi)
        i += 1


def _slice_polyline(pts: np.ndarray, cum: np.ndarray, a: float, b: float) -> np.ndarray:
    """The 3-space polyline corresponding to arc length [a, b)."""
    out = []
    for i, (lo, hi) in _covered_subsegments(cum, a, b):
        seg_len = cum[i + 1] - cum[i]
        if seg_len <= 0.0:
            continue
        p, q = pts[i], pts[i + 1]
        f0 = (lo - cum[i]) / seg_len
        f1 = (hi - cum[i]) / seg_len
        start = p + f0 * (q - p)
        end = p + f1 * (q - p)
        if not out:
            out.append(start)
        out.append(end)
    return np.array(out) if out else np.empty((0, 3))


def _arclen_position(pts: np.ndarray, cum: np.ndarray, point: np.ndarray) -> float:
    """Arc-length coordinate of a point lying on (or near) the polyline."""
    a = pts[:-1]
    d = pts[1:] - a
    denom = np.einsum("ij,ij->i", d, d)
    denom[denom == 0.0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", point - a, d) / denom, 0.0, 1.0)
    proj = a + t[:, None] * d
    dist2 = np.einsum("ij,ij->i", proj - point, proj - point)
    i = int(np.argmin(dist2))
    return float(cum[i] + t[i] * (cum[i + 1] - cum[i]))


def stability_monitor(rows: list[MeasureRow], window: int, followup: int = 10) -> list[str]:
    """Check the never-stable property over one walker's measure rows.

    Violations: a length-``window`` stretch with nonzero formation where
    every dB is zero, or a dB = 0 interval not followed within ``followup``
    intervals by dB != 0 while formation continues.
    """
    violations: list[str] = []
    active = [r for r in rows if r.status == ACTIVE]
    for start in range(0, max(0, len(active) - window + 1)):
        chunk = active[start : start + window]
        if sum(r.f_rate for r in chunk) > 0.0 and all(r.db == 0.0 for r in chunk):
            violations.append(f"window starting at interval {chunk[0].interval}: all dB zero with formation")
    for i, r in enumerate(active):
        if r.db != 0.0:
            continue
        tail = active[i + 1 : i + 1 + followup]
        if not tail:
            continue
        if sum(t.f_rate for t in tail) > 0.0 and all(t.db == 0.0 for t in tail):
            violations.append(f"dB stuck at zero after interval {r.interval}")
    return violations
