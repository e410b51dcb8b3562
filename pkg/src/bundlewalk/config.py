"""Run configuration: JSON ingestion, validation, defaults, and echoing.

The effective config (all defaults filled) is written into every run
directory so a run can be reproduced from its artifacts alone.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .errors import ConfigInvalid
from .geometry import Bundle
from .removal import RemovalConfig
from .rng import run_level_rng
from .walk import NestedProfile, RadiusDistribution, WalkerConfig

DEFAULTS = {
    "seed": 0,
    "horizon": 100,
    "bundle": {
        "parallel_offsets": [0.0, 1.0],
        "transversals": [{"angle": 0.0, "pivot_offset": 0.0}],
    },
    "walkers": {
        "count": 1,
        "defaults": {
            "radius": {"kind": "constant", "r": 0.5},
            "eps_dist": 1e-9,
            "eps_int": 1e-6,
            "p_switch": 0.5,
            "max_rejections": 64,
            "nested_mode": False,
            "nested_candidate_frac": 1.0,
            "nested_radius_floor": 0.0,
            "allow_revisit": False,
            "start_plane_offset": 0.0,
            "start_transversal": None,
            "z0": None,
            "box": [-1.0, 1.0, -1.0, 1.0],
        },
        "overrides": {},
    },
    "removal": {
        "enabled": False,
        "window": 1,
        "start": 0,
        "mode": "fraction",
        "psi": 0.5,
        "eps_share": 1e-9,
        "plane_hole": None,
    },
}


# Variant-record fields whose shape depends on a discriminator: overrides
# replace them wholesale instead of key-merging.
_REPLACE_KEYS = {"radius", "z0", "box", "start", "plane_hole", "overrides"}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise ConfigInvalid(f"unknown config field {path + key!r}")
        if isinstance(base[key], dict) and isinstance(value, dict) and key not in _REPLACE_KEYS:
            out[key] = _merge(base[key], value, path + key + ".")
        else:
            out[key] = copy.deepcopy(value)
    return out


class RunConfig:
    """Validated effective configuration for one simulation run."""

    def __init__(self, raw: dict):
        self.data = _merge(DEFAULTS, raw)
        self._validate()

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigInvalid(f"config file not found: {path}") from None
        except json.JSONDecodeError as e:
            raise ConfigInvalid(f"config is not valid JSON: {e}") from None
        if not isinstance(raw, dict):
            raise ConfigInvalid("config root must be a JSON object")
        return cls(raw)

    def _validate(self) -> None:
        d = self.data
        if not isinstance(d["seed"], int) or d["seed"] < 0:
            raise ConfigInvalid("seed must be a non-negative integer")
        if not isinstance(d["horizon"], int) or d["horizon"] < 0:
            raise ConfigInvalid("horizon must be a non-negative integer")
        offsets = d["bundle"]["parallel_offsets"]
        if not offsets or not all(isinstance(o, (int, float)) for o in offsets):
            raise ConfigInvalid("bundle.parallel_offsets must be a non-empty list of numbers")
        if len(set(offsets)) != len(offsets):
            raise ConfigInvalid("bundle.parallel_offsets must be distinct")
        for i, t in enumerate(d["bundle"]["transversals"]):
            if "angle" not in t or "pivot_offset" not in t:
                raise ConfigInvalid(f"bundle.transversals[{i}] needs angle and pivot_offset")
        w = d["walkers"]
        if not isinstance(w["count"], int) or w["count"] < 0:
            raise ConfigInvalid("walkers.count must be a non-negative integer")
        for wid_str, override in w["overrides"].items():
            try:
                wid = int(wid_str)
            except ValueError:
                raise ConfigInvalid(f"walkers.overrides key {wid_str!r} is not a walker id") from None
            if not (0 <= wid < w["count"]):
                raise ConfigInvalid(f"walkers.overrides[{wid_str}] is out of range")
            unknown = set(override) - set(DEFAULTS["walkers"]["defaults"])
            if unknown:
                raise ConfigInvalid(f"walkers.overrides[{wid_str}] has unknown fields {sorted(unknown)}")
        for wid in range(w["count"]):
            spec = self.walker_spec(wid)
            try:
                self._walker_config(spec)
            except (ValueError, ConfigInvalid) as e:
                raise ConfigInvalid(f"walkers[{wid}]: {e}") from None
            if spec["start_transversal"] is not None:
                if not (0 <= int(spec["start_transversal"]) < len(d["bundle"]["transversals"])):
                    raise ConfigInvalid(f"walkers[{wid}].start_transversal is out of range")
            elif spec["start_plane_offset"] not in offsets:
                raise ConfigInvalid(f"walkers[{wid}].start_plane_offset is not a bundle offset")
        r = d["removal"]
        if r["enabled"]:
            try:
                RemovalConfig(window=r["window"], start=0, mode=r["mode"], psi=r["psi"], eps_share=r["eps_share"])
            except ValueError as e:
                raise ConfigInvalid(f"removal: {e}") from None
            start = r["start"]
            if isinstance(start, dict):
                rng_spec = start.get("uniform")
                if not (isinstance(rng_spec, list) and len(rng_spec) == 2 and rng_spec[0] <= rng_spec[1]):
                    raise ConfigInvalid("removal.start.uniform must be [lo, hi] with lo <= hi")
            elif not isinstance(start, int) or start < 0:
                raise ConfigInvalid("removal.start must be a non-negative integer or {'uniform': [lo, hi]}")
            ph = r["plane_hole"]
            if ph is not None:
                if "plane_offset" not in ph or "at_interval" not in ph:
                    raise ConfigInvalid("removal.plane_hole needs plane_offset and at_interval")
                if ph["plane_offset"] not in offsets:
                    raise ConfigInvalid("removal.plane_hole.plane_offset is not a bundle offset")

    # -- materialization ----------------------------------------------------

    def walker_spec(self, wid: int) -> dict:
        w = self.data["walkers"]
        spec = copy.deepcopy(w["defaults"])
        spec.update(w["overrides"].get(str(wid), {}))
        return spec

    def _walker_config(self, spec: dict) -> WalkerConfig:
        rad = spec["radius"]
        kind = rad.get("kind")
        if kind == "constant":
            radius = RadiusDistribution("constant", r=float(rad["r"]))
        elif kind == "uniform":
            radius = RadiusDistribution("uniform", r_min=float(rad["r_min"]), r_max=float(rad["r_max"]))
        elif kind == "lognormal":
            radius = RadiusDistribution("lognormal", mu=float(rad["mu"]), sigma=float(rad["sigma"]))
        else:
            raise ConfigInvalid(f"radius.kind must be constant, uniform or lognormal, got {kind!r}")
        return WalkerConfig(
            radius=radius,
            eps_dist=float(spec["eps_dist"]),
            eps_int=float(spec["eps_int"]),
            p_switch=float(spec["p_switch"]),
            max_rejections=int(spec["max_rejections"]),
            nested_mode=bool(spec["nested_mode"]),
            nested_profile=NestedProfile(
                candidate_frac=float(spec["nested_candidate_frac"]),
                radius_floor=float(spec["nested_radius_floor"]),
            ),
            allow_revisit=bool(spec["allow_revisit"]),
            seed=self.data["seed"],
        )

    def walker_config(self, wid: int) -> WalkerConfig:
        return self._walker_config(self.walker_spec(wid))

    def build_bundle(self) -> Bundle:
        bundle = Bundle()
        for offset in self.data["bundle"]["parallel_offsets"]:
            bundle.add_parallel(float(offset))
        for t in self.data["bundle"]["transversals"]:
            bundle.add_transversal(angle=float(t["angle"]), pivot_offset=float(t["pivot_offset"]))
        return bundle

    def removal_config(self) -> RemovalConfig | None:
        r = self.data["removal"]
        if not r["enabled"]:
            return None
        return RemovalConfig(
            window=r["window"],
            start=self.resolve_removal_start(),
            mode=r["mode"],
            psi=r["psi"],
            eps_share=r["eps_share"],
        )

    def resolve_removal_start(self) -> int:
        start = self.data["removal"]["start"]
        if isinstance(start, dict):
            lo, hi = start["uniform"]
            gen = run_level_rng(self.data["seed"]).seek(-1)
            return int(gen.integers(int(lo), int(hi) + 1))
        return int(start)

    def echo(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n")
