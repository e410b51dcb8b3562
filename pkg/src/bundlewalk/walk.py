"""Two-step-randomness walkers: per interval draw a radius, form a disc,
draw the next point, enforce distinctness, and switch planes at intersection
lines.

Every interval consumes draws from its own counter-indexed substream (see
rng.SubstreamRng), so the disc of step k is a function of the vertex of step
k-1 and the substream alone.  Replaying from any intermediate state with the
same substreams reproduces the suffix exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Bundle, BundlePoint, Disc, PlaneId, bundle_point, embed, project
from .rng import SubstreamRng

ACTIVE = "active"
HALTED_BLOCKED = "halted_blocked"
HALTED_PLANE_HOLE = "halted_plane_hole"


@dataclass(frozen=True)
class RadiusDistribution:
    """Law for the per-step disc radius: constant, uniform or log-normal."""

    kind: str
    r: float = 1.0
    r_min: float = 0.0
    r_max: float = 1.0
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind == "constant":
            if not self.r > 0.0:
                raise ValueError("constant radius must be positive")
        elif self.kind == "uniform":
            if not (0.0 < self.r_min <= self.r_max):
                raise ValueError("uniform radius needs 0 < r_min <= r_max")
        elif self.kind == "lognormal":
            if not self.sigma >= 0.0:
                raise ValueError("lognormal sigma must be non-negative")
        else:
            raise ValueError(f"unknown radius distribution kind {self.kind!r}")

    def draw(self, gen) -> float:
        if self.kind == "constant":
            return self.r
        if self.kind == "uniform":
            return self.r_min + (self.r_max - self.r_min) * gen.random()
        return math.exp(self.mu + self.sigma * gen.standard_normal())


@dataclass(frozen=True)
class NestedProfile:
    """How nested-mode steps spend their shrinking room.

    The literal law (candidate uniform over the whole disc, radius uniform
    over the full feasible interval) shrinks the radius by e^{-5/2} per step
    on average, which exhausts float64 within ~20 steps.  Profiles with
    candidate_frac < 1 and radius_floor > 0 bound the per-step loss so long
    chains stay representable; containment is strict either way.
    """

    candidate_frac: float = 1.0
    radius_floor: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.candidate_frac <= 1.0):
            raise ValueError("candidate_frac must lie in (0, 1]")
        if not (0.0 <= self.radius_floor < 1.0):
            raise ValueError("radius_floor must lie in [0, 1)")


@dataclass(frozen=True)
class WalkerConfig:
    radius: RadiusDistribution = RadiusDistribution("constant", r=1.0)
    eps_dist: float = 1e-9
    eps_int: float = 1e-6
    p_switch: float = 0.5
    max_rejections: int = 64
    nested_mode: bool = False
    nested_profile: NestedProfile = NestedProfile()
    allow_revisit: bool = False
    seed: int = 0

    def __post_init__(self):
        if not self.eps_dist > 0.0:
            raise ValueError("eps_dist must be positive")
        if not self.eps_int > 0.0:
            raise ValueError("eps_int must be positive")
        if not (0.0 <= self.p_switch <= 1.0):
            raise ValueError("p_switch must lie in [0, 1]")
        if not self.max_rejections >= 1:
            raise ValueError("max_rejections must be at least 1")


@dataclass(frozen=True)
class StepEvent:
    """Full record of one two-step iteration."""

    walker: int
    interval: int
    disc: Disc
    switched_plane: PlaneId | None
    chosen: BundlePoint
    rejections: int


class EventLog:
    """Append-only per-run record of step events plus each walker's origin."""

    def __init__(self):
        self.events: list[StepEvent] = []
        self.init_points: dict[int, BundlePoint] = {}

    def append(self, ev: StepEvent) -> None:
        self.events.append(ev)

    def for_walker(self, walker: int) -> list[StepEvent]:
        return [e for e in self.events if e.walker == walker]

    def vertex_sequence(self, walker: int) -> list[BundlePoint]:
        seq = [self.init_points[walker]] if walker in self.init_points else []
        seq.extend(e.chosen for e in self.events if e.walker == walker)
        return seq


class WalkerState:
    """Mutable per-walker state: current point, visited index, RNG, status."""

    def __init__(self, wid: int, cfg: WalkerConfig, start: BundlePoint):
        self.id = wid
        self.cfg = cfg
        self.current = start
        self.interval = 0
        self.status = ACTIVE
        self.rng = SubstreamRng(cfg.seed, wid)
        self.prev_disc: Disc | None = None
        self._visited = np.empty((256, 3), dtype=np.float64)
        self._visited[0] = start.global_
        self._n_visited = 1

    @property
    def visited(self) -> np.ndarray:
        return self._visited[: self._n_visited]

    def _record(self, p: BundlePoint) -> None:
        if self._n_visited == self._visited.shape[0]:
            grown = np.empty((2 * self._visited.shape[0], 3), dtype=np.float64)
            grown[: self._n_visited] = self._visited[: self._n_visited]
            self._visited = grown
        self._visited[self._n_visited] = p.global_
        self._n_visited += 1

    def too_close(self, x: float, y: float, z: float, eps: float) -> bool:
        v = self._visited[: self._n_visited]
        dx = v[:, 0] - x
        dy = v[:, 1] - y
        dz = v[:, 2] - z
        d2 = dx * dx
        d2 += dy * dy
        d2 += dz * dz
        return d2.min() < eps * eps


def init_walker(
    cfg: WalkerConfig,
    bundle: Bundle,
    plane: PlaneId,
    z0: complex | None = None,
    box: tuple[float, float, float, float] | None = None,
    walker_id: int = 0,
) -> WalkerState:
    """Start a walker on a plane, at z0 or uniformly in a local-coordinate box."""
    pl = bundle.plane(plane)
    if z0 is None:
        if box is None:
            box = (-1.0, 1.0, -1.0, 1.0)
        gen = SubstreamRng(cfg.seed, walker_id).seek(-1)
        z0 = complex(
            box[0] + (box[1] - box[0]) * gen.random(),
            box[2] + (box[3] - box[2]) * gen.random(),
        )
    start = bundle_point(pl, z0, secondary=_secondary_plane(bundle, pl.id, embed(pl, z0), cfg.eps_int))
    return WalkerState(walker_id, cfg, start)


def _secondary_plane(bundle: Bundle, pid: PlaneId, g: np.ndarray, eps: float) -> PlaneId | None:
    for line in bundle.lines_of(pid):
        if line.distance_to(g) < eps:
            a, b = line.planes
            return b if a == pid else a
    return None


def _near_lines(bundle: Bundle, pid: PlaneId, g: np.ndarray, eps: float):
    return [ln for ln in bundle.lines_of(pid) if ln.distance_to(g) < eps]


def step(w: WalkerState, bundle: Bundle, removed=None) -> StepEvent | None:
    """Advance one interval; returns the event, or None when the walker
    blocks (max_rejections consecutive rejections, status HaltedBlocked).

    Draw order per interval is fixed: radius, then the plane-switch decision
    when the current point sits on an intersection line, then candidate
    draws until acceptance.
    """

    if w.status != ACTIVE:
        raise RuntimeError(f"walker {w.id} is not active ({w.status})")
    cfg = w.cfg
    gen = w.rng.seek(w.interval)

    nested_room = None
    if cfg.nested_mode and w.prev_disc is not None:
        room = w.prev_disc.radius - abs(w.current.local - w.prev_disc.center)
        if room <= 1e-15 * w.prev_disc.radius:
            # Previous candidate left no feasible radius interval (empty
            # relative to the disc scale); the walk cannot nest further.
            w.status = HALTED_BLOCKED
            return None
        lo = cfg.nested_profile.radius_floor * room
        radius = lo + (room - lo) * gen.random()
        while not radius > 0.0:
            radius = lo + (room - lo) * gen.random()
        nested_room = room
    else:
        radius = cfg.radius.draw(gen)

    disc_plane = bundle.plane(w.current.plane)
    switched: PlaneId | None = None
    if not cfg.nested_mode:
        lines = _near_lines(bundle, w.current.plane, w.current.global_, cfg.eps_int)
        if lines and gen.random() < cfg.p_switch:
            line = lines[int(gen.integers(0, len(lines)))]
            a, b = line.planes
            target = b if a == w.current.plane else a
            disc_plane = bundle.plane(target)
            switched = target

    if switched is None:
        center = w.current.local
    else:
        center, _ = project(disc_plane, w.current.global_)
    disc = Disc(plane=disc_plane.id, center=center, radius=radius)

    draw_radius = radius if nested_room is None else radius * cfg.nested_profile.candidate_frac
    rejections = 0
    while rejections < cfg.max_rejections:
        cand = _uniform_in_disc(gen, center, draw_radius)
        gx, gy, gz = disc_plane.embed_xyz(cand)
        if nested_room is not None and radius - abs(cand - center) <= 1e-15 * radius:
            # DegenerateDisc for the next iteration; redraw the candidate.
            rejections += 1
            continue
        if not cfg.allow_revisit and w.too_close(gx, gy, gz, cfg.eps_dist):
            rejections += 1
            continue
        if removed is not None and removed.blocked(disc_plane.id, center, cand):
            rejections += 1
            continue
        cand_global = np.array((gx, gy, gz), dtype=np.float64)
        chosen = BundlePoint(
            plane=disc_plane.id,
            local=cand,
            global_=cand_global,
            secondary=_secondary_plane(bundle, disc_plane.id, cand_global, cfg.eps_int),
        )
        ev = StepEvent(
            walker=w.id,
            interval=w.interval,
            disc=disc,
            switched_plane=switched,
            chosen=chosen,
            rejections=rejections,
        )
        w.current = chosen
        w.interval += 1
        w._record(chosen)
        w.prev_disc = disc
        return ev

    w.status = HALTED_BLOCKED
    return None


def _uniform_in_disc(gen, center: complex, radius: float) -> complex:
    u = gen.random()
    theta = 2.0 * math.pi * gen.random()
    r = radius * math.sqrt(u)
    return center + complex(r * math.cos(theta), r * math.sin(theta))


def nested_step(w: WalkerState, bundle: Bundle, removed=None) -> StepEvent | None:
    """One nesting iteration: the new disc sits strictly inside the previous
    one.  Raises DegenerateDisc when the previous candidate left no feasible
    radius interval at all (redraws inside `step` handle the per-candidate
    case)."""
    from .errors import DegenerateDisc

    if not w.cfg.nested_mode:
        raise RuntimeError("nested_step requires a walker configured with nested_mode")
    if w.prev_disc is not None:
        room = w.prev_disc.radius - abs(w.current.local - w.prev_disc.center)
        if room <= 1e-15 * w.prev_disc.radius:
            raise DegenerateDisc("feasible radius interval is empty")
    return step(w, bundle, removed)


def run(w: WalkerState, n: int, bundle: Bundle, removed=None, log: EventLog | None = None):
    """Run up to n intervals; stops early on halt.  Returns (Contour, EventLog)."""
    from .contour import Contour

    if log is None:
        log = EventLog()
    log.init_points.setdefault(w.id, w.current)
    contour = Contour(w.id)
    contour.append(w.current, interval=-1)
    for _ in range(n):
        ev = step(w, bundle, removed)
        if ev is None:
            break
        log.append(ev)
        contour.append(ev.chosen, interval=ev.interval)
    return contour, log


def replay_from(
    cfg: WalkerConfig,
    bundle: Bundle,
    init_point: BundlePoint,
    events: list[StepEvent],
    cut: int,
    walker_id: int,
    removed=None,
) -> list[StepEvent]:
    """Rebuild the walker state as of interval ``cut`` from a log and re-run
    the remaining intervals; with the same substreams the suffix must match
    the original log exactly."""

    if not (0 <= cut <= len(events)):
        raise ValueError("cut must lie within the log")
    w = WalkerState(walker_id, cfg, init_point)
    for ev in events[:cut]:
        w.current = ev.chosen
        w.interval = ev.interval + 1
        w._record(ev.chosen)
        w.prev_disc = ev.disc
    out = []
    for _ in range(len(events) - cut):
        ev = step(w, bundle, removed)
        if ev is None:
            break
        out.append(ev)
    return out


def reachable_in(events: list[StepEvent], a: int, b: int) -> int:
    """Number of steps between the points of intervals a and b of one walker's
    log: exactly b - a, the only transition count with positive probability."""
    intervals = [e.interval for e in events]
    if not intervals or a not in intervals or b not in intervals:
        raise IndexError("intervals outside the log")
    if a > b:
        raise IndexError("need a <= b")
    return b - a


def uniqueness_check(log_a: EventLog, log_b: EventLog, walker_a: int = 0, walker_b: int = 0) -> bool:
    """True when the two vertex sequences differ anywhere (distinct contours)."""
    sa = log_a.vertex_sequence(walker_a)
    sb = log_b.vertex_sequence(walker_b)
    if not sa or not sb:
        raise ValueError("uniqueness_check needs non-empty logs")
    if len(sa) != len(sb):
        return True
    for p, q in zip(sa, sb):
        if p.plane != q.plane or p.local != q.local:
            return True
    return False


def length_coincidence(log_a: EventLog, log_b: EventLog, walker_a: int = 0, walker_b: int = 0, tol: float = 1e-12) -> bool:
    """Flag: distinct sequences whose polyline lengths happen to agree."""
    if not uniqueness_check(log_a, log_b, walker_a, walker_b):
        return False

    def total(log: EventLog, wid: int) -> float:
        seq = log.vertex_sequence(wid)
        pts = np.array([p.global_ for p in seq])
        return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())

    return abs(total(log_a, walker_a) - total(log_b, walker_b)) <= tol
