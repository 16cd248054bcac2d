"""Command-line interface: outputs, exit codes, override plumbing."""

import csv
import json
import os

import pytest

from fcplanner.cli import main
from fcplanner.harness import EgoConfig, Scenario, ScriptedObstacle, save_scenario

from conftest import scenario_path


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def test_plan_writes_solution(tmp_path):
    rc = main(["plan", "--scenario", scenario_path("empty"),
               "--out", str(tmp_path)])
    assert rc == 0
    blob = _read_json(tmp_path / "solution.json")
    assert blob["scenario"] == "empty"
    assert len(blob["steps"]) == 61
    assert blob["diagnostics"]["status"] in ("optimal", "max_iter")
    assert blob["steps"][-1]["u"] is None


def test_episode_writes_log_and_metrics(tmp_path):
    rc = main(["episode", "--scenario", scenario_path("empty"),
               "--out", str(tmp_path), "--seed", "4"])
    assert rc == 0
    metrics = _read_json(tmp_path / "metrics.json")
    assert metrics["passed"] is True
    episode = _read_json(tmp_path / "episode.json")
    assert episode["cycles"] == len(episode["records"])
    assert episode["seed"] == 4


def test_episode_astar_planner(tmp_path):
    rc = main(["episode", "--scenario", scenario_path("empty"),
               "--out", str(tmp_path), "--planner", "astar"])
    assert rc == 0
    assert _read_json(tmp_path / "episode.json")["planner"] == "astar"


def test_aborting_episode_exits_one(tmp_path):
    sc = Scenario(
        name="wall",
        reference=[[0.0, 0.0], [120.0, 0.0]],
        road_lb=-2.5, road_ub=2.5,
        ego=EgoConfig(x=2.0, y=0.0, speed=8.0),
        obstacles=[ScriptedObstacle(kind="vehicle", x=35.0, y=0.0, yaw=0.0,
                                    length=4.0, width=4.0)],
        end_s=50.0,
    )
    path = tmp_path / "wall.json"
    save_scenario(sc, str(path))
    rc = main(["episode", "--scenario", str(path), "--out", str(tmp_path)])
    assert rc == 1
    metrics = _read_json(tmp_path / "metrics.json")
    assert metrics["aborted"] is True


def test_montecarlo_outputs(tmp_path):
    rc = main(["montecarlo", "--scenario", scenario_path("empty"),
               "--out", str(tmp_path), "--trials", "2", "--seed", "9"])
    assert rc == 0
    agg = _read_json(tmp_path / "aggregate.json")
    assert agg["trials"] == 2 and agg["seed"] == 9
    assert "M_t" not in agg["metrics"]
    timing = _read_json(tmp_path / "timing.json")
    assert "M_t" in timing
    with open(tmp_path / "trials.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert "M_my" in rows[0]


def test_bench_outputs(tmp_path, capsys):
    rc = main(["bench", "--scenario", scenario_path("empty"),
               "--out", str(tmp_path), "--runs", "3"])
    assert rc == 0
    blob = _read_json(tmp_path / "bench.json")
    assert blob["runs"] == 3
    assert "times" not in blob   # raw samples live in the histogram file
    with open(tmp_path / "runtime_hist.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["bin_left", "bin_right", "count"]
    assert sum(int(r[2]) for r in rows[1:]) == 3
    assert "mean=" in capsys.readouterr().out


def test_set_overrides_are_applied(tmp_path):
    rc = main(["plan", "--scenario", scenario_path("empty"),
               "--out", str(tmp_path), "--set", "n_steps=20"])
    assert rc == 0
    assert len(_read_json(tmp_path / "solution.json")["steps"]) == 21


def test_unknown_override_exits_two(tmp_path):
    rc = main(["plan", "--scenario", scenario_path("empty"),
               "--out", str(tmp_path), "--set", "warp_drive=1"])
    assert rc == 2


def test_malformed_set_exits_two(tmp_path):
    rc = main(["plan", "--scenario", scenario_path("empty"),
               "--out", str(tmp_path), "--set", "no_equals_sign"])
    assert rc == 2


def test_missing_scenario_exits_two(tmp_path):
    rc = main(["plan", "--scenario", str(tmp_path / "nope.json"),
               "--out", str(tmp_path)])
    assert rc == 2


def test_bad_subcommand_exits_two(capsys):
    rc = main(["warp"])
    capsys.readouterr()
    assert rc == 2


def test_bad_log_level_exits_two(monkeypatch, capsys):
    monkeypatch.setenv("FCP_LOG_LEVEL", "chatty")
    rc = main(["plan", "--scenario", scenario_path("empty"), "--out", "."])
    capsys.readouterr()
    assert rc == 2


def test_single_thread_pins_env(tmp_path, monkeypatch):
    monkeypatch.delenv("OMP_NUM_THREADS", raising=False)
    rc = main(["plan", "--scenario", scenario_path("empty"),
               "--out", str(tmp_path), "--single-thread"])
    assert rc == 0
    assert os.environ["OMP_NUM_THREADS"] == "1"
