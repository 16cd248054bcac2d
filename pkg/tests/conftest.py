"""Shared fixtures. Thread pinning happens before numpy loads so the
runtime-sensitive tests measure single-threaded behavior."""

import os

for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest

from fcplanner import build_reference
from fcplanner.harness import load_scenario, run_episode

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "..", "scenarios")


def scenario_path(name: str) -> str:
    return os.path.abspath(os.path.join(SCENARIO_DIR, f"{name}.json"))


@pytest.fixture
def straight_ref():
    return build_reference([[0.0, 0.0], [200.0, 0.0]])


@pytest.fixture(scope="session")
def circle_ref():
    # radius 40 three-quarter arc, dense enough that resampling is benign
    t = np.linspace(0.0, 1.5 * np.pi, 400)
    pts = np.column_stack([40.0 * np.cos(t), 40.0 * np.sin(t)])
    return build_reference(pts)


@pytest.fixture(scope="session")
def sine_ref():
    x = np.linspace(0.0, 120.0, 600)
    pts = np.column_stack([x, 4.0 * np.sin(0.08 * x)])
    return build_reference(pts)


@pytest.fixture(scope="session")
def motivating_scenario():
    return load_scenario(scenario_path("motivating"))


@pytest.fixture(scope="session")
def motivating_log(motivating_scenario):
    return run_episode(motivating_scenario, planner="fcp", seed=0)


@pytest.fixture(scope="session")
def motivating_log_astar(motivating_scenario):
    return run_episode(motivating_scenario, planner="astar", seed=0)
