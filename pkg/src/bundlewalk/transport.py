"""Transportation contours between contours on two intersecting planes.

A transport crosses the planes' intersection line once and decomposes into
three parts: source contour to an entry point on the line, travel along the
line to an exit point, and exit point to the target contour.  Shortest and
farthest variants search a densified grid over the line window and refine
with golden-section passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contour import Contour
from .errors import DirectionMismatch, DisjointPlanes, MismatchedContours
from .geometry import IntersectionLine

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
ANCHOR_TOL = 1e-9


@dataclass(frozen=True)
class TransportLengths:
    part1: float
    part2: float
    part3: float

    @property
    def total(self) -> float:
        return self.part1 + self.part2 + self.part3


@dataclass(frozen=True)
class TransportContour:
    from_contour: int
    to_contour: int
    anchor_from: np.ndarray
    via: np.ndarray
    via_exit: np.ndarray
    anchor_to: np.ndarray
    direction: str  # "forward" | "reverse"


def _contour_plane(c: Contour) -> int:
    return c.points[0].plane


def _check_planes(s: Contour, s2: Contour, line: IntersectionLine) -> None:
    if {_contour_plane(s), _contour_plane(s2)} != set(line.planes):
        raise DisjointPlanes(
            f"contour planes {(_contour_plane(s), _contour_plane(s2))} do not match line planes {line.planes}"
        )


def point_to_polyline(pts: np.ndarray, q: np.ndarray) -> tuple[float, np.ndarray]:
    """Distance from q to a polyline and the closest polyline point."""
    if pts.shape[0] == 1:
        return float(np.linalg.norm(q - pts[0])), pts[0]
    a = pts[:-1]
    d = pts[1:] - a
    denom = np.einsum("ij,ij->i", d, d)
    denom[denom == 0.0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", q - a, d) / denom, 0.0, 1.0)
    proj = a + t[:, None] * d
    dist2 = np.einsum("ij,ij->i", proj - q, proj - q)
    i = int(np.argmin(dist2))
    return float(math.sqrt(dist2[i])), proj[i]


def _line_window(s: Contour, s2: Contour, line: IntersectionLine, pad: float = 0.0) -> tuple[float, float]:
    both = np.vstack([s.globals, s2.globals])
    t = (both - line.point) @ line.direction
    # A degenerate window (all projections equal) is legitimate: the only
    # path through the line is the one via that point.
    return float(t.min()) - pad, float(t.max()) + pad


def _golden_min(f, lo: float, hi: float, iters: int = 64) -> float:
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def shortest_transport(
    s: Contour, s2: Contour, line: IntersectionLine, resolution: int = 200
) -> tuple[TransportContour, TransportLengths]:
    """Minimize part1 + part2 + part3 over entry/exit line points.

    Grid search at ``resolution`` samples over the projection window of both
    contours, then alternating golden-section refinement of the two line
    parameters.  The contour-side anchors are exact polyline projections, so
    the result is never worse than any vertex-level candidate.
    """

    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    _check_planes(s, s2, line)

    def lpoint(t: float) -> np.ndarray:
        return line.point + t * line.direction

    def through(t: float) -> float:
        return point_to_polyline(s.globals, lpoint(t))[0] + point_to_polyline(s2.globals, lpoint(t))[0]

    # Distance to a set is 1-Lipschitz along the line, so entry and exit
    # coincide at the optimum and the search is one-dimensional: grid at
    # ``resolution`` samples, then golden-section refinement of every local
    # basin.
    lo, hi = _line_window(s, s2, line)
    ts = np.linspace(lo, hi, resolution)
    g = np.array([through(t) for t in ts])
    best_t = float(ts[int(np.argmin(g))])
    best_val = float(g.min())
    for i in range(resolution):
        if 0 < i < resolution - 1 and not (g[i] <= g[i - 1] and g[i] <= g[i + 1]):
            continue
        a = float(ts[max(i - 1, 0)])
        b = float(ts[min(i + 1, resolution - 1)])
        t_ref = _golden_min(through, a, b)
        val = through(t_ref)
        if val < best_val:
            best_val, best_t = val, t_ref

    p1, anchor_from = point_to_polyline(s.globals, lpoint(best_t))
    p3, anchor_to = point_to_polyline(s2.globals, lpoint(best_t))
    t1 = t2 = best_t
    lengths = TransportLengths(part1=p1, part2=0.0, part3=p3)
    contour = TransportContour(
        from_contour=s.walker,
        to_contour=s2.walker,
        anchor_from=anchor_from,
        via=lpoint(t1),
        via_exit=lpoint(t2),
        anchor_to=anchor_to,
        direction="forward",
    )
    return contour, lengths


def farthest_transport(
    s: Contour, s2: Contour, line: IntersectionLine, resolution: int = 200
) -> tuple[TransportContour, TransportLengths]:
    """Maximize the three-part total over contour vertices and a bounded line
    window (projection hull padded by both contours' diameters)."""

    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    _check_planes(s, s2, line)

    def diameter(pts: np.ndarray) -> float:
        span = pts.max(axis=0) - pts.min(axis=0)
        return float(np.linalg.norm(span))

    pad = diameter(s.globals) + diameter(s2.globals)
    lo, hi = _line_window(s, s2, line, pad=pad)
    ts = np.concatenate([np.linspace(lo, hi, resolution), [lo, hi]])
    lp = line.point[None, :] + ts[:, None] * line.direction[None, :]

    def vertex_dists(pts: np.ndarray) -> np.ndarray:
        # (n_ts, n_vertices) distances from line samples to contour vertices
        return np.linalg.norm(lp[:, None, :] - pts[None, :, :], axis=2)

    dsrc = vertex_dists(s.globals)
    ddst = vertex_dists(s2.globals)
    best_src = dsrc.max(axis=1)
    best_dst = ddst.max(axis=1)
    mid = np.abs(ts[:, None] - ts[None, :])
    total = best_src[:, None] + mid + best_dst[None, :]
    i, j = np.unravel_index(int(np.argmax(total)), total.shape)
    vi = int(np.argmax(dsrc[i]))
    vj = int(np.argmax(ddst[j]))

    lengths = TransportLengths(
        part1=float(dsrc[i, vi]), part2=float(mid[i, j]), part3=float(ddst[j, vj])
    )
    contour = TransportContour(
        from_contour=s.walker,
        to_contour=s2.walker,
        anchor_from=s.globals[vi],
        via=lp[i],
        via_exit=lp[j],
        anchor_to=s2.globals[vj],
        direction="forward",
    )
    return contour, lengths


def directed_length(s: Contour, t: TransportContour, lengths: TransportLengths, s2: Contour) -> float:
    """Length of the multilevel contour carrying both endpoint contours in
    full plus the three-part transport between them."""
    endpoints = {t.from_contour, t.to_contour}
    if endpoints != {s.walker, s2.walker}:
        raise MismatchedContours(f"transport joins {endpoints}, got contours {(s.walker, s2.walker)}")
    d_from, _ = point_to_polyline(s.globals if t.from_contour == s.walker else s2.globals, t.anchor_from)
    d_to, _ = point_to_polyline(s2.globals if t.to_contour == s2.walker else s.globals, t.anchor_to)
    if d_from > ANCHOR_TOL or d_to > ANCHOR_TOL:
        raise MismatchedContours("transport anchors do not lie on the given contours")
    return s.total_length() + lengths.total + s2.total_length()


def reverse(t: TransportContour, lengths: TransportLengths) -> tuple[TransportContour, TransportLengths]:
    """The same connection traversed target-to-source."""
    rev = TransportContour(
        from_contour=t.to_contour,
        to_contour=t.from_contour,
        anchor_from=t.anchor_to,
        via=t.via_exit,
        via_exit=t.via,
        anchor_to=t.anchor_from,
        direction="reverse" if t.direction == "forward" else "forward",
    )
    return rev, TransportLengths(part1=lengths.part3, part2=lengths.part2, part3=lengths.part1)


def chain_directed_length(contours: list[Contour], hops: list[TransportLengths]) -> float:
    """Multi-hop total: full lengths of every contour in the chain plus each
    hop's three-part transport, with intermediate contours counted once."""
    if len(hops) != len(contours) - 1:
        raise MismatchedContours("a chain of n contours needs n - 1 transports")
    return sum(c.total_length() for c in contours) + sum(h.total for h in hops)


def reverse_equality_check(t: TransportContour, t2: TransportContour, tol: float = ANCHOR_TOL) -> bool:
    """True when the forward and reverse transports share anchor pairs, in
    which case their middle terms agree within ``tol``."""
    if t.direction != "forward" or t2.direction != "reverse":
        raise DirectionMismatch("expected a forward and a reverse transport")
    if {t.from_contour, t.to_contour} != {t2.from_contour, t2.to_contour}:
        raise DirectionMismatch("transports join different contour pairs")
    same = (
        np.linalg.norm(t.anchor_from - t2.anchor_to) <= tol
        and np.linalg.norm(t.anchor_to - t2.anchor_from) <= tol
    )
    return bool(same)
