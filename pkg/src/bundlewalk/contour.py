"""Contours as timestamped polylines over bundle points, and their lengths.

Lengths are 3-space quantities: once a contour crosses between planes the
only consistent arc length is the Euclidean one on the global embedding.
Segment region attribution uses the segment's start vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyContour, IndexOutOfRange, NonconvergentQuadrature, UnknownPlane
from .geometry import BundlePoint, PlaneId


class Contour:
    """Append-only polyline of bundle points, one vertex per walk interval."""

    def __init__(self, walker: int):
        self.walker = walker
        self.points: list[BundlePoint] = []
        self.intervals: list[int] = []
        self.times: list[float] = []
        self._buf = np.empty((64, 3), dtype=np.float64)
        self._n = 0
        self._seg_cache: np.ndarray | None = None
        self._cum_cache: np.ndarray | None = None

    def __len__(self) -> int:
        return self._n

    def append(self, p: BundlePoint, interval: int, t: float | None = None) -> None:
        if self.intervals and interval <= self.intervals[-1]:
            raise ValueError("interval indices must be strictly increasing")
        if self._n and not np.any(p.global_ != self._buf[self._n - 1]):
            raise ValueError("consecutive vertices must be distinct")
        self.points.append(p)
        self.intervals.append(interval)
        self.times.append(float(interval) if t is None else t)
        if self._n == self._buf.shape[0]:
            grown = np.empty((2 * self._buf.shape[0], 3), dtype=np.float64)
            grown[: self._n] = self._buf[: self._n]
            self._buf = grown
        self._buf[self._n] = p.global_
        self._n += 1
        self._seg_cache = None
        self._cum_cache = None

    @property
    def globals(self) -> np.ndarray:
        """(N, 3) array of vertex embeddings; do not mutate."""
        return self._buf[: self._n]

    def segment_lengths(self) -> np.ndarray:
        """Length of each polyline segment (N-1 values)."""
        if self._seg_cache is None:
            if self._n < 2:
                self._seg_cache = np.empty(0, dtype=np.float64)
            else:
                self._seg_cache = np.linalg.norm(np.diff(self.globals, axis=0), axis=1)
        return self._seg_cache

    def cumulative_lengths(self) -> np.ndarray:
        """Arc length from the origin to each vertex (N values, starts at 0)."""
        if self._cum_cache is None:
            out = np.zeros(self._n, dtype=np.float64)
            if self._n > 1:
                out[1:] = np.cumsum(self.segment_lengths())
            self._cum_cache = out
        return self._cum_cache

    def total_length(self) -> float:
        return float(self.segment_lengths().sum())

    def segment_plane(self, i: int) -> PlaneId:
        """Plane a segment is attributed to: its start vertex's plane."""
        return self.points[i].plane


def polyline_length(c: Contour, i: int, j: int) -> float:
    """Sum of Euclidean segment lengths between vertices i and j."""
    if not (0 <= i <= j < len(c)):
        raise IndexOutOfRange(f"vertex range [{i}, {j}] out of bounds for {len(c)} vertices")
    if i == j:
        return 0.0
    diffs = np.diff(c.globals[i : j + 1], axis=0)
    return float(np.linalg.norm(diffs, axis=1).sum())


def concat_length_additivity(c: Contour, i: int, a: int, j: int) -> tuple[float, float, float]:
    """Lengths (L(i,a), L(a,j), L(i,j)) with the third computed as the exact
    float sum of the first two, so additivity holds identically."""
    if not (0 <= i <= a <= j < len(c)):
        raise IndexOutOfRange(f"split {i} <= {a} <= {j} out of bounds")
    left = polyline_length(c, i, a)
    right = polyline_length(c, a, j)
    return left, right, left + right


def is_multilevel(c: Contour) -> bool:
    """True when the vertices span at least two distinct planes."""
    if len(c) == 0:
        raise EmptyContour("cannot classify an empty contour")
    first = c.points[0].plane
    return any(p.plane != first for p in c.points)


@dataclass(frozen=True)
class ParametricArc:
    """Smooth arc in one plane: position/derivative over a real parameter."""

    alpha: float
    beta: float
    position: callable
    derivative: callable
    plane: PlaneId = 0

    def __post_init__(self):
        if not self.beta > self.alpha:
            raise ValueError("arc domain must satisfy beta > alpha")

    def derivative_residual(self, samples: int = 32, h: float = 1e-7) -> float:
        """Max finite-difference residual of the supplied derivative."""
        taus = np.linspace(self.alpha + h, self.beta - h, samples)
        worst = 0.0
        for tau in taus:
            fd = (self.position(tau + h) - self.position(tau - h)) / (2.0 * h)
            worst = max(worst, abs(fd - self.derivative(tau)))
        return worst


def arc_length_quadrature(arc: ParametricArc, tol: float, max_depth: int = 40) -> float:
    """Adaptive Simpson quadrature of |arc.derivative| over [alpha, beta].

    Absolute error target ``tol``; raises NonconvergentQuadrature when the
    recursion exceeds ``max_depth`` without meeting the local target.
    """

    if not tol > 0.0:
        raise ValueError("tol must be positive")

    def f(tau: float) -> float:
        return abs(arc.derivative(tau))

    def simpson(a: float, fa: float, m: float, fm: float, b: float, fb: float) -> float:
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, fa, m, fm, b, fb, whole, eps, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(a, fa, lm, flm, m, fm)
        right = simpson(m, fm, rm, frm, b, fb)
        if abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        if depth >= max_depth:
            raise NonconvergentQuadrature(
                f"adaptive refinement exceeded depth {max_depth} on [{a}, {b}]"
            )
        half = 0.5 * eps
        return recurse(a, fa, lm, flm, m, fm, left, half, depth + 1) + recurse(
            m, fm, rm, frm, b, fb, right, half, depth + 1
        )

    a, b = arc.alpha, arc.beta
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = simpson(a, fa, m, fm, b, fb)
    return recurse(a, fa, m, fm, b, fb, whole, tol, 0)


@dataclass(frozen=True)
class RegionPartition:
    """Disjoint cover of the bundle's planes around one distinguished plane."""

    in_plane: PlaneId
    above: frozenset[PlaneId]
    below: frozenset[PlaneId]

    def __post_init__(self):
        if self.in_plane in self.above or self.in_plane in self.below or (self.above & self.below):
            raise ValueError("partition regions must be disjoint")

    def region_of(self, pid: PlaneId) -> str:
        if pid == self.in_plane:
            return "in"
        if pid in self.above:
            return "above"
        if pid in self.below:
            return "below"
        raise UnknownPlane(f"plane {pid} missing from the partition")


def plane_decomposition(c: Contour, part: RegionPartition) -> tuple[float, float, float]:
    """Split the polyline length into (in-plane, above, below) parts.

    Each segment is attributed to the region of its start vertex; the three
    parts re-sum to the total polyline length.
    """

    sums = {"in": 0.0, "above": 0.0, "below": 0.0}
    if len(c) >= 2:
        lengths = c.segment_lengths()
        for i in range(len(c) - 1):
            sums[part.region_of(c.segment_plane(i))] += float(lengths[i])
    return sums["in"], sums["above"], sums["below"]
