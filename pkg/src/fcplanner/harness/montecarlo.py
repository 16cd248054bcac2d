"""Monte Carlo randomization and runtime benchmarking.

Trials perturb every vehicle obstacle uniformly within +-10 m longitudinal,
+-2 m lateral (both along the reference frame at the vehicle's station) and
+-10 degrees of heading, then run a full episode. Trial RNG streams are
spawned from a single master seed, so results are bit-reproducible; timing
statistics are kept out of the deterministic aggregate on purpose.
"""

import copy
import math
import time
from dataclasses import replace

import numpy as np

from ..frenet import build_reference
from ..obstacles import VEHICLE
from .episode import FCP, run_episode
from .metrics import MetricsReport, compute_metrics
from .scenario import Scenario

_AGG_FIELDS = ("M_my", "M_ay", "M_l", "M_md", "M_ad")


def randomize_scenario(sc: Scenario, rng) -> Scenario:
    """Perturb vehicle obstacle poses in the reference frame."""
    ref = build_reference(sc.reference)
    out = copy.deepcopy(sc)
    for o in out.obstacles:
        if o.kind != VEHICLE:
            continue
        s, _ = ref.project(np.array([o.x, o.y]))
        h = ref.heading_at(s)
        tx, ty = math.cos(h), math.sin(h)
        d_long = rng.uniform(-10.0, 10.0)
        d_lat = rng.uniform(-2.0, 2.0)
        o.x += d_long * tx - d_lat * ty
        o.y += d_long * ty + d_lat * tx
        o.yaw += rng.uniform(-math.radians(10.0), math.radians(10.0))
    return out


def _aggregate(rows: list[dict]) -> dict:
    agg = {}
    for key in _AGG_FIELDS:
        vals = [r[key] for r in rows if r[key] is not None]
        if vals:
            agg[key] = {"mean": float(np.mean(vals)), "std": float(np.std(vals))}
        else:
            agg[key] = {"mean": None, "std": None}
    return agg


def monte_carlo(sc: Scenario, trials: int, seed: int, planner: str = FCP) -> dict:
    """Run randomized episodes and aggregate their metrics.

    Returns {"trials": [per-trial metric dicts], "aggregate": {...},
    "timing": {...}}. The aggregate block contains no wall-clock numbers, so
    identical (scenario, seed) runs serialize identically.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    master = np.random.SeedSequence(seed)
    children = master.spawn(trials)

    rows = []
    times = []
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        trial_sc = randomize_scenario(sc, rng)
        ep_seed = int(child.generate_state(1)[0] % (2**31))
        log = run_episode(trial_sc, planner=planner, seed=ep_seed)
        rep = compute_metrics(log)
        row = rep.to_dict()
        row["trial"] = i
        row["collided"] = log.collided
        row["left_road"] = log.left_road
        times.append(row["M_t"])
        rows.append(row)

    failed = sum(1 for r in rows if not r["passed"])
    aggregate = {
        "scenario": sc.name,
        "planner": planner,
        "trials": trials,
        "seed": seed,
        "metrics": _aggregate(rows),
        "passed": trials - failed,
        "failed": failed,
        "aborted": sum(1 for r in rows if r["aborted"]),
        "collisions": sum(1 for r in rows if r["collided"]),
        "road_exits": sum(1 for r in rows if r["left_road"]),
    }
    timing = {
        "M_t": {"mean": float(np.mean(times)), "std": float(np.std(times)),
                "max": float(np.max(times))},
    }
    return {"trials": rows, "aggregate": aggregate, "timing": timing}


def bench_solves(sc: Scenario, runs: int, seed: int) -> dict:
    """One-shot cold planning cycles on randomized variants of a scenario.

    Measures the full pipeline (perception ingestion through optimization)
    per run and bins the runtimes into a histogram.
    """
    from ..decision import DecisionGovernor
    from .episode import PipelineConfig, _ego_frenet, plan_cycle

    if runs < 1:
        raise ValueError("runs must be at least 1")
    master = np.random.SeedSequence(seed)
    children = master.spawn(runs)

    base_ref = build_reference(sc.reference)
    times = []
    statuses = {"ok": 0, "failed": 0}
    for child in children:
        rng = np.random.default_rng(child)
        trial_sc = randomize_scenario(sc, rng)
        cfg = PipelineConfig.from_overrides(trial_sc.overrides, risk_mode=trial_sc.risk_mode)
        cfg.processor = cfg.processor.with_ego(trial_sc.ego.length, trial_sc.ego.width)
        half_w = trial_sc.ego.width / 2
        governor = DecisionGovernor(
            trial_sc.road_lb + half_w, trial_sc.road_ub - half_w, ego_width=0.0,
            clearance=cfg.clearance, risk_mode=cfg.risk_mode,
            hysteresis=cfg.hysteresis,
        )
        state = _ego_frenet(base_ref, trial_sc)
        # jitter the start so runs exercise different transients
        state = replace(state,
                        d=state.d + rng.uniform(-1.0, 1.0),
                        phi=state.phi + rng.uniform(-0.05, 0.05))
        perceived = [o.as_raw(0.0) for o in trial_sc.obstacles]

        t0 = time.perf_counter()
        path, corridor, sol, cause = plan_cycle(
            base_ref, trial_sc.road_lb + half_w, trial_sc.road_ub - half_w,
            perceived, state, cfg, governor,
        )
        times.append(time.perf_counter() - t0)
        statuses["ok" if cause is None else "failed"] += 1

    times = np.asarray(times)
    edges = np.histogram_bin_edges(times, bins=30)
    counts, _ = np.histogram(times, bins=edges)
    return {
        "runs": runs,
        "seed": seed,
        "mean": float(times.mean()),
        "max": float(times.max()),
        "p50": float(np.percentile(times, 50)),
        "p95": float(np.percentile(times, 95)),
        "completed": statuses["ok"],
        "failed": statuses["failed"],
        "times": times,
        "hist_edges": edges,
        "hist_counts": counts,
    }
