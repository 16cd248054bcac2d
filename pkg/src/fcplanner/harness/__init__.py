"""Scenario simulation, baseline planner, metrics, and randomized studies."""

from .astar import astar_baseline
from .episode import (
    ASTAR,
    FCP,
    CycleRecord,
    EpisodeLog,
    PipelineConfig,
    plan_cycle,
    run_episode,
)
from .metrics import MetricsReport, compute_metrics, wrap_angle
from .montecarlo import bench_solves, monte_carlo, randomize_scenario
from .scenario import (
    EgoConfig,
    Scenario,
    ScriptedObstacle,
    load_scenario,
    save_scenario,
    scenario_from_dict,
)

__all__ = [
    "ASTAR",
    "FCP",
    "CycleRecord",
    "EgoConfig",
    "EpisodeLog",
    "MetricsReport",
    "PipelineConfig",
    "Scenario",
    "ScriptedObstacle",
    "astar_baseline",
    "bench_solves",
    "compute_metrics",
    "load_scenario",
    "monte_carlo",
    "plan_cycle",
    "randomize_scenario",
    "run_episode",
    "save_scenario",
    "scenario_from_dict",
    "wrap_angle",
]
