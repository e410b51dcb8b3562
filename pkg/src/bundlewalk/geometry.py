"""Embedded complex planes in 3-space: the parallel family, transversals, and
their intersection lines.

Coordinate convention: the parallel family is stacked along the x axis, so a
parallel plane with offset ``o`` is ``x = o`` spanned by (e_y, e_z), and a
local coordinate ``u + iv`` embeds to ``(o, u, v)``.  The default transversal
is ``z = 0`` with local coordinate ``x + iy``; it meets the plane at offset
``o`` in the line ``{(o, y, 0)}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidAngle, TransversalIsParallel, UnknownPlane

PLANE_TOL = 1e-9

PlaneId = int


def vec3(x: float, y: float, z: float) -> np.ndarray:
    return np.array([float(x), float(y), float(z)], dtype=np.float64)


def _unit(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("zero vector has no direction")
    return v / n


@dataclass(frozen=True)
class Plane:
    """An embedded 2-plane: origin plus an orthonormal in-plane basis.

    ``kind`` is "parallel" (member of the stacked family, at ``offset`` along
    the bundle axis) or "transversal" (tilted by ``angle`` degrees, pivoting
    about the line where it crosses the axis at ``pivot_offset``).
    """

    id: PlaneId
    origin: np.ndarray
    basis1: np.ndarray
    basis2: np.ndarray
    kind: str
    offset: float = 0.0
    angle: float = 0.0
    pivot_offset: float = 0.0

    def __post_init__(self):
        for name in ("origin", "basis1", "basis2"):
            v = getattr(self, name)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be a finite 3-vector")
        if abs(np.linalg.norm(self.basis1) - 1.0) > 1e-12 or abs(np.linalg.norm(self.basis2) - 1.0) > 1e-12:
            raise ValueError("basis vectors must be unit length")
        if abs(float(np.dot(self.basis1, self.basis2))) > 1e-12:
            raise ValueError("basis vectors must be orthogonal")

        object.__setattr__(self, "_o", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "_b1", tuple(float(v) for v in self.basis1))
        object.__setattr__(self, "_b2", tuple(float(v) for v in self.basis2))

    @property
    def normal(self) -> np.ndarray:
        return np.cross(self.basis1, self.basis2)

    def embed_xyz(self, local: complex) -> tuple[float, float, float]:
        """Scalar-path embedding for hot loops."""
        u, v = local.real, local.imag
        o, b1, b2 = self._o, self._b1, self._b2
        return (o[0] + u * b1[0] + v * b2[0], o[1] + u * b1[1] + v * b2[1], o[2] + u * b1[2] + v * b2[2])

    def __hash__(self):
        return hash(self.id)

    def __eq__(self, other):
        return isinstance(other, Plane) and other.id == self.id


@dataclass(frozen=True)
class IntersectionLine:
    """Line shared by two planes: a point, a unit direction, and the pair."""

    point: np.ndarray
    direction: np.ndarray
    planes: tuple[PlaneId, PlaneId]

    def __post_init__(self):
        object.__setattr__(self, "_pt", (float(self.point[0]), float(self.point[1]), float(self.point[2])))
        object.__setattr__(
            self, "_dir", (float(self.direction[0]), float(self.direction[1]), float(self.direction[2]))
        )

    def distance_to(self, p) -> float:
        px, py, pz = self._pt
        dx, dy, dz = self._dir
        rx = float(p[0]) - px
        ry = float(p[1]) - py
        rz = float(p[2]) - pz
        t = rx * dx + ry * dy + rz * dz
        qx = rx - t * dx
        qy = ry - t * dy
        qz = rz - t * dz
        return math.sqrt(qx * qx + qy * qy + qz * qz)


@dataclass(frozen=True)
class Disc:
    """Open disc in one plane's local coordinates."""

    plane: PlaneId
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("disc radius must be positive")

    def contains(self, z: complex) -> bool:
        return abs(z - self.center) < self.radius


@dataclass(frozen=True)
class BundlePoint:
    """A point of the bundle: plane membership, local complex coordinate and
    the global embedding.  ``secondary`` is set when the point sits on an
    intersection line and therefore also belongs to another plane.
    """

    plane: PlaneId
    local: complex
    global_: np.ndarray
    secondary: PlaneId | None = None


def make_parallel_plane(pid: PlaneId, offset: float) -> Plane:
    return Plane(
        id=pid,
        origin=vec3(offset, 0.0, 0.0),
        basis1=vec3(0.0, 1.0, 0.0),
        basis2=vec3(0.0, 0.0, 1.0),
        kind="parallel",
        offset=float(offset),
    )


def make_transversal_plane(pid: PlaneId, angle: float = 0.0, pivot_offset: float = 0.0) -> Plane:
    """Transversal plane: the z = 0 sheet rotated by ``angle`` degrees about
    the line {(pivot_offset, y, 0)}.  Angle 0 is z = 0 itself.
    """

    base = Plane(
        id=pid,
        origin=vec3(pivot_offset, 0.0, 0.0),
        basis1=vec3(1.0, 0.0, 0.0),
        basis2=vec3(0.0, 1.0, 0.0),
        kind="transversal",
        angle=float(angle),
        pivot_offset=float(pivot_offset),
    )
    if angle == 0.0:
        return base
    pivot = IntersectionLine(
        point=vec3(pivot_offset, 0.0, 0.0), direction=vec3(0.0, 1.0, 0.0), planes=(-1, -1)
    )
    rotated = rotate_about_line(base, angle, pivot)
    return Plane(
        id=pid,
        origin=rotated.origin,
        basis1=rotated.basis1,
        basis2=rotated.basis2,
        kind="transversal",
        angle=float(angle),
        pivot_offset=float(pivot_offset),
    )


class Bundle:
    """Finite materialization of the parallel family plus transversal planes.

    Planes are added in a single-writer setup phase; intersection lines are
    cached on first use.  ``axis`` is the unit normal of the parallel family.
    """

    def __init__(self, axis: np.ndarray | None = None):
        self.axis = _unit(axis if axis is not None else vec3(1.0, 0.0, 0.0))
        self.planes: dict[PlaneId, Plane] = {}
        self._line_cache: dict[tuple[PlaneId, PlaneId], IntersectionLine | None] = {}
        self._lines_of_cache: dict[PlaneId, tuple[IntersectionLine, ...]] = {}
        self._next_id = 0

    def add_parallel(self, offset: float) -> Plane:
        plane = make_parallel_plane(self._next_id, offset)
        self._next_id += 1
        self.planes[plane.id] = plane
        self._lines_of_cache.clear()
        return plane

    def add_transversal(self, angle: float = 0.0, pivot_offset: float = 0.0) -> Plane:
        plane = make_transversal_plane(self._next_id, angle, pivot_offset)
        if abs(abs(float(np.dot(plane.normal, self.axis))) - 1.0) < PLANE_TOL:
            raise TransversalIsParallel("transversal plane is parallel to the bundle family")
        self._next_id += 1
        self.planes[plane.id] = plane
        self._lines_of_cache.clear()
        return plane

    def plane(self, pid: PlaneId) -> Plane:
        try:
            return self.planes[pid]
        except KeyError:
            raise UnknownPlane(f"no plane with id {pid}") from None

    def parallel_planes(self) -> list[Plane]:
        return [p for _, p in sorted(self.planes.items()) if p.kind == "parallel"]

    def transversal_planes(self) -> list[Plane]:
        return [p for _, p in sorted(self.planes.items()) if p.kind == "transversal"]

    def parallel_by_offset(self, offset: float, tol: float = PLANE_TOL) -> Plane:
        for p in self.parallel_planes():
            if abs(p.offset - offset) <= tol:
                return p
        raise UnknownPlane(f"no parallel plane at offset {offset}")

    def line_between(self, a: PlaneId, b: PlaneId) -> IntersectionLine | None:
        """Cached intersection line of two member planes (None if parallel)."""
        key = (a, b) if a < b else (b, a)
        if key not in self._line_cache:
            result = intersect_planes(self.plane(key[0]), self.plane(key[1]))
            self._line_cache[key] = result if isinstance(result, IntersectionLine) else None
        return self._line_cache[key]

    def lines_of(self, pid: PlaneId) -> tuple[IntersectionLine, ...]:
        """All intersection lines the given plane shares with other members."""
        cached = self._lines_of_cache.get(pid)
        if cached is None:
            out = []
            for other in sorted(self.planes):
                if other == pid:
                    continue
                line = self.line_between(pid, other)
                if line is not None:
                    out.append(line)
            cached = tuple(out)
            self._lines_of_cache[pid] = cached
        return cached


def embed(plane: Plane, local: complex) -> np.ndarray:
    """Local complex coordinate -> global point."""
    return np.array(plane.embed_xyz(local), dtype=np.float64)


def project(plane: Plane, p: np.ndarray) -> tuple[complex, float]:
    """Closest plane point of ``p`` as a local coordinate, plus the
    off-plane distance."""
    d = p - plane.origin
    u = float(np.dot(d, plane.basis1))
    v = float(np.dot(d, plane.basis2))
    local = complex(u, v)
    return local, float(np.linalg.norm(p - embed(plane, local)))


def intersect_planes(p: Plane, q: Plane) -> IntersectionLine | str:
    """Intersection of two planes: an IntersectionLine, or "parallel" /
    "coincident" when the normals align."""
    if p.id == q.id:
        raise ValueError("intersect_planes needs two distinct planes")
    n1, n2 = p.normal, q.normal
    direction = np.cross(n1, n2)
    norm = float(np.linalg.norm(direction))
    if norm < 1e-9:
        _, dist = project(p, q.origin)
        return "coincident" if dist < PLANE_TOL else "parallel"
    direction = direction / norm
    # Point on both planes: solve the 2x2 system in the span of (n1, n2).
    d1 = float(np.dot(n1, p.origin))
    d2 = float(np.dot(n2, q.origin))
    n11 = float(np.dot(n1, n1))
    n12 = float(np.dot(n1, n2))
    n22 = float(np.dot(n2, n2))
    det = n11 * n22 - n12 * n12
    c1 = (d1 * n22 - d2 * n12) / det
    c2 = (d2 * n11 - d1 * n12) / det
    point = c1 * n1 + c2 * n2
    return IntersectionLine(point=point, direction=direction, planes=(p.id, q.id))


def slice_bundle(bundle: Bundle, transversal: Plane, tol: float = PLANE_TOL):
    """Partition the parallel family by signed offset against the slicing
    locus (the transversal's pivot offset).

    Returns (left ids, on-locus ids, right ids); the three sets are disjoint
    and cover the family.
    """

    if transversal.kind == "parallel" or abs(abs(float(np.dot(transversal.normal, bundle.axis))) - 1.0) < tol:
        raise TransversalIsParallel("slicing plane belongs to the parallel family")
    locus = transversal.pivot_offset
    left, on_locus, right = set(), set(), set()
    for p in bundle.parallel_planes():
        if abs(p.offset - locus) <= tol:
            on_locus.add(p.id)
        elif p.offset < locus:
            left.add(p.id)
        else:
            right.add(p.id)
    return left, on_locus, right


def rotate_about_line(plane: Plane, theta_deg: float, pivot: IntersectionLine) -> Plane:
    """Rigid rotation of a plane about a pivot line (Rodrigues), in degrees."""
    if not (0.0 < theta_deg <= 360.0):
        raise InvalidAngle(f"rotation angle must lie in (0, 360], got {theta_deg}")
    theta = math.radians(theta_deg)
    k = _unit(pivot.direction)
    cos_t, sin_t = math.cos(theta), math.sin(theta)

    def rot_vec(v: np.ndarray) -> np.ndarray:
        return v * cos_t + np.cross(k, v) * sin_t + k * np.dot(k, v) * (1.0 - cos_t)

    def rot_point(p: np.ndarray) -> np.ndarray:
        return pivot.point + rot_vec(p - pivot.point)

    return Plane(
        id=plane.id,
        origin=rot_point(plane.origin),
        basis1=_unit(rot_vec(plane.basis1)),
        basis2=_unit(rot_vec(plane.basis2)),
        kind=plane.kind,
        offset=plane.offset,
        angle=plane.angle + theta_deg,
        pivot_offset=plane.pivot_offset,
    )


def rotate_transversal(plane: Plane, theta_deg: float, pivot: IntersectionLine) -> Plane:
    return rotate_about_line(plane, theta_deg, pivot)


def on_intersection(p: BundlePoint, line: IntersectionLine, eps: float) -> bool:
    """True when the point sits within ``eps`` of the intersection line."""
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    return line.distance_to(p.global_) < eps


def bundle_point(plane: Plane, local: complex, secondary: PlaneId | None = None) -> BundlePoint:
    return BundlePoint(plane=plane.id, local=local, global_=embed(plane, local), secondary=secondary)
