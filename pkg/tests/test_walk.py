import math

import numpy as np
import pytest

from bundlewalk.artifacts import event_line
from bundlewalk.contour import is_multilevel
from bundlewalk.removal import RemovedSnapshot
from bundlewalk.walk import (
    ACTIVE,
    HALTED_BLOCKED,
    EventLog,
    NestedProfile,
    RadiusDistribution,
    WalkerConfig,
    init_walker,
    length_coincidence,
    reachable_in,
    replay_from,
    run,
    step,
    uniqueness_check,
)


class TestInit:
    def test_explicit_origin(self, bundle):
        w = init_walker(WalkerConfig(seed=1), bundle, bundle.parallel_planes()[0].id, z0=0j)
        assert w.current.local == 0j
        assert w.interval == 0
        assert w.status == ACTIVE

    def test_same_seed_same_state(self, bundle):
        cfg = WalkerConfig(seed=5)
        pid = bundle.parallel_planes()[0].id
        a = init_walker(cfg, bundle, pid, box=(-1, 1, -1, 1))
        b = init_walker(cfg, bundle, pid, box=(-1, 1, -1, 1))
        assert a.current.local == b.current.local

    def test_random_in_box_mean(self, bundle):
        # Monte Carlo oracle: the empirical mean of uniform draws over
        # [-1, 1]^2 approaches the origin.
        pid = bundle.parallel_planes()[0].id
        pts = [
            init_walker(WalkerConfig(seed=s), bundle, pid, box=(-1, 1, -1, 1), walker_id=0).current.local
            for s in range(10_000)
        ]
        mean = sum(pts) / len(pts)
        assert abs(mean) < 0.05


class TestStep:
    def test_disc_membership(self, bundle):
        cfg = WalkerConfig(seed=2, radius=RadiusDistribution("constant", r=1.0))
        w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=5 + 5j)
        for _ in range(50):
            ev = step(w, bundle)
            assert abs(ev.chosen.local - ev.disc.center) < ev.disc.radius

    def test_no_switch_away_from_lines(self, bundle):
        cfg = WalkerConfig(seed=3, radius=RadiusDistribution("constant", r=0.1), p_switch=1.0)
        w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=10 + 10j)
        for _ in range(20):
            ev = step(w, bundle)
            assert ev.switched_plane is None

    def test_blocked_by_removed_ring(self, bundle):
        # Island capture: a removed ring far smaller than every
        # possible radius rejects (almost) all candidates via the crossing
        # rule, so the walker blocks within max_rejections draws.
        pid = bundle.parallel_planes()[0].id
        ring_r = 1e-3
        angles = np.linspace(0.0, 2 * np.pi, 33)
        ring = np.array(
            [
                (
                    10 + ring_r * math.cos(a),
                    10 + ring_r * math.sin(a),
                    10 + ring_r * math.cos(b),
                    10 + ring_r * math.sin(b),
                )
                for a, b in zip(angles[:-1], angles[1:])
            ]
        )
        removed = RemovedSnapshot({pid: ring})
        cfg = WalkerConfig(seed=4, radius=RadiusDistribution("uniform", r_min=1.0, r_max=2.0), max_rejections=50)
        w = init_walker(cfg, bundle, pid, z0=10 + 10j)
        ev = step(w, bundle, removed)
        assert ev is None
        assert w.status == HALTED_BLOCKED

    def test_switch_at_intersection(self, bundle):
        p0 = bundle.parallel_planes()[0]
        t = bundle.transversal_planes()[0]
        cfg = WalkerConfig(seed=11, radius=RadiusDistribution("constant", r=0.5), p_switch=1.0)
        # local 2+0j on the parallel plane embeds to (0, 2, 0), on the line.
        w = init_walker(cfg, bundle, p0.id, z0=2 + 0j)
        ev = step(w, bundle)
        assert ev.switched_plane == t.id
        assert ev.chosen.plane == t.id


class TestNested:
    def _contained(self, inner, outer) -> bool:
        return abs(inner.center - outer.center) + inner.radius <= outer.radius

    def test_first_step_nests(self, bundle):
        cfg = WalkerConfig(seed=6, nested_mode=True, radius=RadiusDistribution("constant", r=1.0))
        w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=0j)
        e0 = step(w, bundle)
        e1 = step(w, bundle)
        assert self._contained(e1.disc, e0.disc)

    def test_literal_law_chain(self, bundle):
        # The literal uniform radius law shrinks fast; whatever chain forms
        # must nest and stay inside the first disc.
        cfg = WalkerConfig(seed=7, nested_mode=True, eps_dist=1e-30, radius=RadiusDistribution("constant", r=1.0))
        w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=0j)
        events = []
        for _ in range(200):
            ev = step(w, bundle)
            if ev is None:
                break
            events.append(ev)
        assert len(events) >= 3
        for prev, cur in zip(events[:-1], events[1:]):
            assert self._contained(cur.disc, prev.disc)
        d0 = events[0].disc
        for ev in events:
            assert abs(ev.chosen.local - d0.center) < d0.radius

    def test_deep_profile_chain_and_intersection(self, bundle):
        cfg = WalkerConfig(
            seed=8,
            nested_mode=True,
            eps_dist=1e-120,
            radius=RadiusDistribution("constant", r=1.0),
            nested_profile=NestedProfile(candidate_frac=1 / 64, radius_floor=63 / 64),
        )
        w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=0j)
        events = []
        for _ in range(1000):
            ev = step(w, bundle)
            assert ev is not None
            events.append(ev)
        for prev, cur in zip(events[:-1], events[1:]):
            assert self._contained(cur.disc, prev.disc)
        # Membership-sampling oracle for the chain intersection: points of
        # the innermost disc belong to every disc of the chain; points of
        # D_k \ D_{k+1} escape the intersection.
        rng = np.random.default_rng(0)
        last = events[-1].disc
        for _ in range(100):
            z = last.center + last.radius * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
            assert all(abs(z - ev.disc.center) < ev.disc.radius for ev in events)
        for k in range(0, len(events) - 1, 97):
            outer, inner = events[k].disc, events[k + 1].disc
            # A point near the outer boundary on the far side from the inner
            # disc is outside the chain intersection.
            away = outer.center + (outer.center - inner.center) / max(abs(outer.center - inner.center), 1e-30) * (
                outer.radius * 0.999
            )
            assert abs(away - inner.center) >= inner.radius


class TestNestedStepSurface:
    def test_matches_step_in_nested_mode(self, bundle):
        from bundlewalk.walk import nested_step

        cfg = WalkerConfig(seed=61, nested_mode=True, radius=RadiusDistribution("constant", r=1.0))
        w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=0j)
        ev = nested_step(w, bundle)
        assert ev is not None and ev.interval == 0

    def test_degenerate_disc_raised(self, bundle):
        from bundlewalk.errors import DegenerateDisc
        from bundlewalk.geometry import Disc
        from bundlewalk.walk import nested_step

        cfg = WalkerConfig(seed=62, nested_mode=True, radius=RadiusDistribution("constant", r=1.0))
        w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=1 + 0j)
        # Previous disc whose boundary passes through the current point.
        w.prev_disc = Disc(plane=w.current.plane, center=0j, radius=1.0)
        with pytest.raises(DegenerateDisc):
            nested_step(w, bundle)

    def test_requires_nested_mode(self, bundle):
        from bundlewalk.walk import nested_step

        w = init_walker(WalkerConfig(seed=63), bundle, bundle.parallel_planes()[0].id, z0=0j)
        with pytest.raises(RuntimeError):
            nested_step(w, bundle)


class TestRecurrentVariant:
    def test_allow_revisit_disables_distinctness(self, bundle):
        # With a distinctness tolerance wider than the disc, a strict walker
        # blocks immediately; the relaxed variant keeps stepping.
        pid = bundle.parallel_planes()[0].id
        strict = WalkerConfig(seed=64, radius=RadiusDistribution("constant", r=0.1), eps_dist=0.5)
        w = init_walker(strict, bundle, pid, z0=10 + 10j)
        assert step(w, bundle) is None
        assert w.status == HALTED_BLOCKED

        relaxed = WalkerConfig(
            seed=64, radius=RadiusDistribution("constant", r=0.1), eps_dist=0.5, allow_revisit=True
        )
        w2 = init_walker(relaxed, bundle, pid, z0=10 + 10j)
        for _ in range(20):
            assert step(w2, bundle) is not None


class TestRun:
    def test_zero_intervals(self, bundle):
        cfg = WalkerConfig(seed=9)
        w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=0j)
        c, log = run(w, 0, bundle)
        assert len(c) == 1
        assert log.events == []

    def test_determinism_byte_identical(self, bundle):
        def one():
            cfg = WalkerConfig(seed=10)
            w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=1 + 1j)
            _, log = run(w, 100, bundle)
            return "\n".join(event_line(e) for e in log.events)

        assert one() == one()

    def test_length_bound(self, bundle):
        r = 0.25
        cfg = WalkerConfig(seed=12, radius=RadiusDistribution("constant", r=r))
        w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=0j)
        c, _ = run(w, 1000, bundle)
        assert c.total_length() < 1000 * r

    def test_state_mirrors_contour(self, bundle):
        # k counts completed steps; the visited index holds exactly the
        # contour's vertices.
        cfg = WalkerConfig(seed=19)
        w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=0j)
        c, log = run(w, 50, bundle)
        assert w.interval == len(log.events)
        assert np.array_equal(w.visited, c.globals)


class TestReachability:
    def test_trivial(self, bundle):
        cfg = WalkerConfig(seed=13)
        w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=0j)
        _, log = run(w, 10, bundle)
        evs = log.for_walker(0)
        assert reachable_in(evs, 3, 3) == 0
        assert reachable_in(evs, 2, 5) == 3

    def test_full_pairwise_scan(self, bundle):
        cfg = WalkerConfig(seed=14)
        w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=0j)
        _, log = run(w, 100, bundle)
        evs = log.for_walker(0)
        for a in range(len(evs)):
            for b in range(a, len(evs)):
                assert reachable_in(evs, a, b) == b - a


class TestUniqueness:
    def _run(self, bundle, seed, z0):
        cfg = WalkerConfig(seed=seed)
        w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=z0)
        _, log = run(w, 5, bundle)
        return log

    def test_different_origins(self, bundle):
        assert uniqueness_check(self._run(bundle, 1, 0j), self._run(bundle, 1, 1j))

    def test_identical_runs(self, bundle):
        assert not uniqueness_check(self._run(bundle, 1, 0j), self._run(bundle, 1, 0j))

    def test_distinct_seeds_overwhelmingly_distinct(self, bundle):
        logs = [self._run(bundle, seed, 0j) for seed in range(200)]
        distinct = sum(
            1 for a, b in zip(logs[:-1], logs[1:]) if uniqueness_check(a, b)
        )
        assert distinct >= len(logs) - 1 - 0  # every adjacent pair distinct

    def test_length_coincidence_flag(self, bundle):
        # Scripted: two different single-segment contours of equal length.
        from bundlewalk.geometry import bundle_point
        from bundlewalk.walk import StepEvent
        from bundlewalk.geometry import Disc

        p0 = bundle.parallel_planes()[0]
        log_a, log_b = EventLog(), EventLog()
        log_a.init_points[0] = bundle_point(p0, 0j)
        log_b.init_points[0] = bundle_point(p0, 1j)
        for log, z in ((log_a, 1 + 0j), (log_b, 1 + 1j)):
            log.append(
                StepEvent(
                    walker=0,
                    interval=0,
                    disc=Disc(plane=p0.id, center=0j, radius=2.0),
                    switched_plane=None,
                    chosen=bundle_point(p0, z),
                    rejections=0,
                )
            )
        assert uniqueness_check(log_a, log_b)
        assert length_coincidence(log_a, log_b)


class TestMarkovReplay:
    def test_suffix_replay_exact(self, bundle):
        cfg = WalkerConfig(seed=15, p_switch=0.8, eps_int=0.2)
        pid = bundle.parallel_planes()[0].id
        w = init_walker(cfg, bundle, pid, z0=0.5 + 0j)
        init_point = w.current
        _, log = run(w, 80, bundle)
        events = log.for_walker(0)
        for cut in (0, 1, 13, 40, 79):
            replayed = replay_from(cfg, bundle, init_point, events, cut, walker_id=0)
            original = [event_line(e) for e in events[cut:]]
            assert [event_line(e) for e in replayed] == original


class TestInvariants:
    def test_distinctness_pairwise(self, bundle):
        cfg = WalkerConfig(seed=16, eps_dist=1e-9)
        w = init_walker(cfg, bundle, bundle.parallel_planes()[0].id, z0=0j)
        c, _ = run(w, 300, bundle)
        pts = c.globals
        diff = pts[:, None, :] - pts[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        np.fill_diagonal(d2, np.inf)
        assert math.sqrt(float(d2.min())) >= cfg.eps_dist

    def test_switch_soundness_and_multilevel_trigger(self, bundle):
        cfg = WalkerConfig(seed=17, p_switch=0.7, eps_int=0.25, radius=RadiusDistribution("constant", r=0.6))
        pid = bundle.parallel_planes()[0].id
        w = init_walker(cfg, bundle, pid, z0=0.1 + 0j)
        c, log = run(w, 200, bundle)
        events = log.for_walker(0)
        vertices = [log.init_points[0]] + [e.chosen for e in events]
        switched_at = None
        for i, ev in enumerate(events):
            if ev.switched_plane is not None:
                prev = vertices[i]
                line = bundle.line_between(prev.plane, ev.switched_plane)
                assert line is not None
                assert line.distance_to(prev.global_) < cfg.eps_int
                if switched_at is None and ev.chosen.plane != pid:
                    switched_at = i
        if switched_at is not None:
            from bundlewalk.contour import Contour

            prefix = Contour(0)
            for i, p in enumerate(vertices[: switched_at + 1]):
                prefix.append(p, interval=i - 1)
            assert not is_multilevel(prefix)
            prefix.append(vertices[switched_at + 1], interval=switched_at)
            assert is_multilevel(prefix)
