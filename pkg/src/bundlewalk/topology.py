"""Holes and islands left behind by the removal process.

Continuum connectivity is approximated on a per-disc grid raster: removed
chains are thickened to one cell width, a flood fill from the raster
boundary marks everything reachable from outside, and unreached free cells
form islands.  Holes are the removed chains themselves (closed point sets no
walker may choose again).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionUnmet, ResolutionTooCoarse
from .geometry import BundlePoint, Disc, PlaneId
from .removal import RemovalLedger


@dataclass(frozen=True)
class Hole:
    """Removed sub-chains forming one unavailable point set."""

    chains: tuple[np.ndarray, ...]
    owners: tuple[int, ...]
    created_at: int

    def total_length(self) -> float:
        return float(
            sum(np.linalg.norm(np.diff(c, axis=0), axis=1).sum() for c in self.chains if c.shape[0] > 1)
        )


def collect_holes(ledger: RemovalLedger, k: int) -> list[Hole]:
    """One hole per walker with removed data: its removed chains as closed
    point sets (endpoints included), stamped with the collection interval."""
    holes = []
    for wid in sorted(ledger.walkers):
        chains = tuple(c for c in ledger.removed_chains(wid) if c.shape[0] > 0)
        if chains:
            holes.append(Hole(chains=chains, owners=(wid,), created_at=k))
    return holes


@dataclass(frozen=True)
class Island:
    """Free cells enclosed by removed chains inside one disc's raster."""

    disc: Disc
    h: float
    cells: frozenset[tuple[int, int]]
    detected_at: int = 0

    def cell_center(self, cell: tuple[int, int]) -> complex:
        i, j = cell
        x0 = self.disc.center.real - self.disc.radius
        y0 = self.disc.center.imag - self.disc.radius
        return complex(x0 + (i + 0.5) * self.h, y0 + (j + 0.5) * self.h)

    def contains_local(self, z: complex) -> bool:
        x0 = self.disc.center.real - self.disc.radius
        y0 = self.disc.center.imag - self.disc.radius
        i = int((z.real - x0) / self.h)
        j = int((z.imag - y0) / self.h)
        return (i, j) in self.cells


class GridRaster:
    """Occupancy raster tiling a disc's bounding square at pitch h: a cell is
    removed when a removed chain passes within h/2 of its center."""

    def __init__(self, disc: Disc, segments: np.ndarray, h: float):
        self.disc = disc
        self.h = float(h)
        r = disc.radius
        self.n = max(2, int(np.ceil(2.0 * r / h)))
        self.x0 = disc.center.real - r
        self.y0 = disc.center.imag - r
        xs = self.x0 + (np.arange(self.n) + 0.5) * h
        ys = self.y0 + (np.arange(self.n) + 0.5) * h
        self.removed = np.zeros((self.n, self.n), dtype=bool)
        if segments is None or len(segments) == 0:
            return
        # Each segment only marks cells inside its bounding box plus the
        # h/2 thickening margin.
        for ax, ay, bx, by in segments:
            i0 = max(0, int((min(ax, bx) - h - self.x0) / h))
            i1 = min(self.n, int((max(ax, bx) + h - self.x0) / h) + 1)
            j0 = max(0, int((min(ay, by) - h - self.y0) / h))
            j1 = min(self.n, int((max(ay, by) + h - self.y0) / h) + 1)
            if i0 >= i1 or j0 >= j1:
                continue
            gx, gy = np.meshgrid(xs[i0:i1], ys[j0:j1], indexing="ij")
            centers = np.stack([gx.ravel(), gy.ravel()], axis=1)
            hit = _dist_point_segment(centers, ax, ay, bx, by) <= h / 2.0
            self.removed[i0:i1, j0:j1] |= hit.reshape(i1 - i0, j1 - j0)

    def free_cells(self) -> np.ndarray:
        return ~self.removed


def _dist_point_segment(pts: np.ndarray, ax, ay, bx, by) -> np.ndarray:
    d = np.array([bx - ax, by - ay])
    den = float(d @ d)
    rel = pts - np.array([ax, ay])
    if den == 0.0:
        return np.sqrt(np.einsum("ij,ij->i", rel, rel))
    t = np.clip((rel @ d) / den, 0.0, 1.0)
    proj = np.array([ax, ay]) + t[:, None] * d
    diff = pts - proj
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def detect_islands(
    disc: Disc, segments: np.ndarray, h: float, detected_at: int = 0
) -> list[Island]:
    """Flood fill from the raster boundary over free cells; free cells not
    reached are grouped into connected components and returned as islands.

    ``segments`` holds the removed chains on the disc's plane as (n, 4) rows
    of local-coordinate endpoints.
    """

    if not h > 0.0 or h >= disc.radius / 8.0:
        raise ResolutionTooCoarse(f"raster pitch {h} must be below radius/8 = {disc.radius / 8.0}")
    if segments is None or len(segments) == 0:
        return []
    raster = GridRaster(disc, segments, h)
    n = raster.n
    free = raster.free_cells()
    reached = np.zeros_like(free)
    queue: deque[tuple[int, int]] = deque()
    for i in range(n):
        for j in (0, n - 1):
            for ci, cj in ((i, j), (j, i)):
                if free[ci, cj] and not reached[ci, cj]:
                    reached[ci, cj] = True
                    queue.append((ci, cj))
    while queue:
        ci, cj = queue.popleft()
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ni, nj = ci + di, cj + dj
            if 0 <= ni < n and 0 <= nj < n and free[ni, nj] and not reached[ni, nj]:
                reached[ni, nj] = True
                queue.append((ni, nj))

    unreached = free & ~reached
    islands: list[Island] = []
    seen = np.zeros_like(unreached)
    for i in range(n):
        for j in range(n):
            if not unreached[i, j] or seen[i, j]:
                continue
            comp = []
            queue.append((i, j))
            seen[i, j] = True
            while queue:
                ci, cj = queue.popleft()
                comp.append((ci, cj))
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    ni, nj = ci + di, cj + dj
                    if 0 <= ni < n and 0 <= nj < n and unreached[ni, nj] and not seen[ni, nj]:
                        seen[ni, nj] = True
                        queue.append((ni, nj))
            islands.append(Island(disc=disc, h=h, cells=frozenset(comp), detected_at=detected_at))
    return islands


AVAILABLE = "available"
HOLE_POINT = "hole_point"
ISLAND_INTERIOR = "island_interior"


def classify_point(
    p: BundlePoint,
    removed_by_plane: dict[PlaneId, np.ndarray],
    islands: list[Island],
    eps: float,
) -> str:
    """HolePoint within eps of a removed chain, IslandInterior inside a
    detected island's cells, Available otherwise."""
    segs = removed_by_plane.get(p.plane)
    if segs is not None and len(segs):
        pt = np.array([[p.local.real, p.local.imag]])
        for ax, ay, bx, by in segs:
            if float(_dist_point_segment(pt, ax, ay, bx, by)[0]) < eps:
                return HOLE_POINT
    for island in islands:
        if island.disc.plane == p.plane and island.contains_local(p.local):
            return ISLAND_INTERIOR
    return AVAILABLE


def holes_union_bound(ledger: RemovalLedger, k: int) -> tuple[float, float, bool]:
    """Compactness bound: removed length at interval k never exceeds the
    length formed by interval k + 1."""
    lhs = 0.0
    rhs = 0.0
    for wl in ledger.walkers.values():
        lhs += sum(v for j, v in wl.removed_per_interval.items() if j <= k)
        rhs += sum(wl.formed[: k + 2])
    return lhs, rhs, lhs <= rhs + 1e-9


def island_to_hole(
    island: Island,
    ledger: RemovalLedger,
    walker_ids: list[int],
    plane: PlaneId,
    drain_interval: int,
) -> bool:
    """Drain the given walkers' removal to completion and report whether the
    island's cells all turned into removed cells.

    Precondition: every island cell is covered (within h/2) by some listed
    walker's contour; otherwise the transition cannot complete.
    """

    centers = np.array(
        [[island.cell_center(c).real, island.cell_center(c).imag] for c in sorted(island.cells)]
    )
    covered = np.zeros(centers.shape[0], dtype=bool)
    for wid in walker_ids:
        c = ledger.walkers[wid].contour
        if len(c) < 2:
            continue
        for i in range(len(c) - 1):
            if c.segment_plane(i) != plane:
                continue
            za, zb = c.points[i].local, c.points[i + 1].local
            covered |= _dist_point_segment(centers, za.real, za.imag, zb.real, zb.imag) <= island.h / 2.0
    if not bool(np.all(covered)):
        raise PreconditionUnmet("island has cells no listed contour covers")

    for wid in walker_ids:
        wl = ledger.walkers[wid]
        if wl.backlog > 0.0:
            ledger.apply_removal(wid, wl.backlog, drain_interval)

    segments = ledger.removed_segments_by_plane().get(plane, np.empty((0, 4)))
    raster = GridRaster(island.disc, segments, island.h)
    return all(raster.removed[i, j] for i, j in island.cells)
