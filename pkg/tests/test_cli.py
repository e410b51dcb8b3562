import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from bundlewalk import artifacts
from bundlewalk.cli import main

REPO = Path(__file__).resolve().parent.parent
CONFIGS = REPO / "configs"


def digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_config(path: Path, **overrides) -> Path:
    base = {
        "seed": 42,
        "horizon": 50,
        "bundle": {
            "parallel_offsets": [0.0, 1.0],
            "transversals": [{"angle": 0.0, "pivot_offset": 0.0}],
        },
        "walkers": {
            "count": 2,
            "defaults": {
                "radius": {"kind": "uniform", "r_min": 0.1, "r_max": 0.3},
                "z0": [0.3, 0.2],
                "eps_int": 0.05,
            },
            "overrides": {"1": {"z0": [-0.4, 0.1]}},
        },
        "removal": {"enabled": True, "window": 1, "start": 5, "mode": "fraction", "psi": 0.5},
    }
    for key, value in overrides.items():
        base[key] = value
    path.write_text(json.dumps(base))
    return path


class TestSimulate:
    def test_horizon_zero(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", horizon=0)
        out = tmp_path / "run"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "events.jsonl").read_text() == ""
        metrics = (out / "metrics.csv").read_text().splitlines()
        assert metrics == [artifacts.METRICS_HEADER]
        report = json.loads((out / "report.json").read_text())
        assert all(w["vertices"] == 1 for w in report["walkers"].values())

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path / "c.json")
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
            outs.append(out)
        for name in ("events.jsonl", "metrics.csv"):
            assert digest(outs[0] / name) == digest(outs[1] / name)

    def test_report_matches_event_resummation(self, tmp_path):
        # External re-summation oracle over events.jsonl.
        cfg = write_config(tmp_path / "c.json", horizon=200)
        out = tmp_path / "run"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        events = [json.loads(line) for line in (out / "events.jsonl").read_text().splitlines()]
        for wid_str, info in report["walkers"].items():
            pts = [info["init"]["global"]]
            pts.extend(ev["global"] for ev in events if ev["walker"] == int(wid_str))
            pts = np.array(pts)
            length = float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum()) if len(pts) > 1 else 0.0
            assert abs(length - info["final_length"]) < 1e-9
            assert info["vertices"] == len(pts)

    def test_snapshot_written(self, tmp_path):
        cfg = write_config(tmp_path / "c.json")
        out = tmp_path / "run"
        main(["simulate", "--config", str(cfg), "--out", str(out)])
        svg = (out / "snapshot.svg").read_text()
        assert svg.startswith("<?xml") and "<svg" in svg and "polyline" in svg

    def test_bad_config_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"horizon": -3}))
        assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2
        assert main(["simulate", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path / "x")]) == 2

    def test_unknown_field_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"horizont": 10}))
        assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2


class TestSeedPrecedence:
    def test_flag_beats_env_beats_config(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path / "c.json")

        def run(name, seed_flag=None, env=None):
            out = tmp_path / name
            argv = ["simulate", "--config", str(cfg), "--out", str(out)]
            if seed_flag is not None:
                argv += ["--seed", str(seed_flag)]
            if env is None:
                monkeypatch.delenv("BUNDLE_SEED", raising=False)
            else:
                monkeypatch.setenv("BUNDLE_SEED", str(env))
            assert main(argv) == 0
            return digest(out / "events.jsonl")

        base = run("base")
        flagged = run("flagged", seed_flag=99)
        env_only = run("env_only", env=99)
        flag_and_env = run("flag_and_env", seed_flag=99, env=1234)
        assert flagged != base
        assert env_only == flagged
        assert flag_and_env == flagged

    def test_effective_config_records_seed(self, tmp_path):
        cfg = write_config(tmp_path / "c.json")
        out = tmp_path / "run"
        main(["simulate", "--config", str(cfg), "--out", str(out), "--seed", "77"])
        effective = json.loads((out / "config.json").read_text())
        assert effective["seed"] == 77


class TestConfigRoundTrip:
    def test_effective_config_rerun_identical(self, tmp_path):
        cfg = write_config(tmp_path / "c.json")
        first = tmp_path / "first"
        main(["simulate", "--config", str(cfg), "--out", str(first)])
        second = tmp_path / "second"
        assert main(["simulate", "--config", str(first / "config.json"), "--out", str(second)]) == 0
        for name in ("events.jsonl", "metrics.csv"):
            assert digest(first / name) == digest(second / name)


class TestVerify:
    def test_fresh_run_passes(self, tmp_path):
        cfg = write_config(tmp_path / "c.json")
        out = tmp_path / "run"
        main(["simulate", "--config", str(cfg), "--out", str(out)])
        assert main(["verify", str(out)]) == 0

    def test_shipped_example_configs_pass(self, tmp_path):
        for name in ("two_walkers.json", "plane_hole.json"):
            out = tmp_path / name.replace(".json", "")
            assert main(["simulate", "--config", str(CONFIGS / name), "--out", str(out)]) == 0
            assert main(["verify", str(out)]) == 0

    def test_corrupted_radius_detected(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json")
        out = tmp_path / "run"
        main(["simulate", "--config", str(cfg), "--out", str(out)])
        lines = (out / "events.jsonl").read_text().splitlines()
        ev = json.loads(lines[5])
        ev["radius"] = ev["radius"] / 1e6
        lines[5] = json.dumps(ev)
        (out / "events.jsonl").write_text("\n".join(lines) + "\n")
        assert main(["verify", str(out)]) == 1
        assert "disc" in capsys.readouterr().out

    def test_corrupted_metrics_detected(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json")
        out = tmp_path / "run"
        main(["simulate", "--config", str(cfg), "--out", str(out)])
        lines = (out / "metrics.csv").read_text().splitlines()
        parts = lines[8].split(",")
        parts[4] = "0.123"  # dB no longer equals F_rate - R_rate
        lines[8] = ",".join(parts)
        (out / "metrics.csv").write_text("\n".join(lines) + "\n")
        assert main(["verify", str(out)]) == 1
        assert "dB" in capsys.readouterr().out

    def test_missing_artifacts_exit_3(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["verify", str(empty)]) == 3

    def test_fuzz_100_seeded_runs_all_pass(self, tmp_path):
        cfg_path = write_config(tmp_path / "c.json", horizon=25)
        for seed in range(100):
            out = tmp_path / f"run{seed}"
            assert main(["simulate", "--config", str(cfg_path), "--out", str(out), "--seed", str(seed)]) == 0
            assert main(["verify", str(out)]) == 0


class TestTransport:
    def _run(self, tmp_path):
        cfg = write_config(
            tmp_path / "c.json",
            horizon=40,
            walkers={
                "count": 2,
                "defaults": {
                    "radius": {"kind": "constant", "r": 0.2},
                    "p_switch": 0.0,
                    "z0": [0.5, 0.5],
                },
                "overrides": {"1": {"start_transversal": 0, "z0": [2.0, 1.0]}},
            },
        )
        out = tmp_path / "run"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        return out

    def test_appends_transport_records(self, tmp_path):
        out = self._run(tmp_path)
        assert main(["transport", str(out), "--from", "0", "--to", "1"]) == 0
        report = json.loads((out / "report.json").read_text())
        assert len(report["transports"]) == 1
        record = report["transports"][0]
        assert record["shortest"]["total"] <= record["farthest"]["total"] + 1e-9
        parts = record["shortest"]["parts"]
        assert record["shortest"]["total"] == pytest.approx(sum(parts), abs=1e-12)
        assert record["directed_forward"] == pytest.approx(record["directed_reverse"], abs=1e-9)

    def test_disjoint_planes_exit_2(self, tmp_path):
        cfg = write_config(
            tmp_path / "c.json",
            horizon=10,
            walkers={
                "count": 2,
                "defaults": {"radius": {"kind": "constant", "r": 0.1}, "p_switch": 0.0, "z0": [0.5, 0.5]},
                "overrides": {"1": {"start_plane_offset": 1.0}},
            },
        )
        out = tmp_path / "run"
        main(["simulate", "--config", str(cfg), "--out", str(out)])
        assert main(["transport", str(out), "--from", "0", "--to", "1"]) == 2


class TestDetectIslandsCli:
    def test_detect_on_run(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", horizon=100)
        out = tmp_path / "run"
        main(["simulate", "--config", str(cfg), "--out", str(out)])
        assert main(["detect-islands", str(out), "--disc", "0:0.0:0.0:1.0"]) == 0
        report = json.loads((out / "report.json").read_text())
        assert "islands" in report

    def test_bad_disc_spec_exit_2(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", horizon=5)
        out = tmp_path / "run"
        main(["simulate", "--config", str(cfg), "--out", str(out)])
        assert main(["detect-islands", str(out), "--disc", "nope"]) == 2


class TestExport:
    def test_csv_and_svg(self, tmp_path):
        cfg = write_config(tmp_path / "c.json")
        out = tmp_path / "run"
        main(["simulate", "--config", str(cfg), "--out", str(out)])
        assert main(["export", "--csv", str(out)]) == 0
        summary = (out / "summary.csv").read_text().splitlines()
        assert summary[0] == "walker,vertices,final_length,multilevel,status"
        assert len(summary) == 3
        (out / "snapshot.svg").unlink()
        assert main(["export", "--svg", str(out)]) == 0
        assert (out / "snapshot.svg").exists()
