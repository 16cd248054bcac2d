"""Closed-loop episode simulation.

Each cycle perceives obstacles with additive Gaussian pose noise, runs the
full pipeline (obstacle processing, deviation decisions, boundary generation,
path optimization or the A* baseline), then advances the ego geometrically
along the freshly planned path at the scripted speed. Audits (collision,
road exit, nearest obstacle distance) are computed against the true,
noise-free obstacle footprints in Cartesian space.

Static obstacles tighten the corridor through the decision governor; dynamic
obstacles never do. Their predicted station crossings feed the optimizer's
risk term instead, as do statics the governor defers in risk mode.

Failures do not raise: the episode stops and the log records the cause, so a
partially driven episode can still be inspected and scored.
"""

import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from ..corridor import generate_bounds
from ..decision import DecisionGovernor, Label
from ..errors import Blocked, EmptyActuationSet, NoPath
from ..frenet import ReferencePath, build_reference, frenet_to_cart
from ..geometry import polygon_distance, polygons_intersect, rect_corners
from ..obstacles import PEDESTRIAN, build_obstacle_set
from ..optimizer import PlannerWeights, SolveStatus, SpaceState, solve
from ..obstacles import ProcessorConfig
from .astar import astar_baseline
from .scenario import Scenario

FCP = "fcp"
ASTAR = "astar"


def _wrap(a: float) -> float:
    return (a + np.pi) % (2 * np.pi) - np.pi


@dataclass
class PipelineConfig:
    """Planner weights plus the harness-side knobs, split from a flat
    override mapping."""

    weights: PlannerWeights = field(default_factory=PlannerWeights)
    processor: ProcessorConfig = field(default_factory=ProcessorConfig)
    clearance: float = 0.25
    hysteresis: float = 0.3
    risk_mode: bool = False
    astar_res: float = 0.25
    astar_dev_weight: float = 0.5

    _HARNESS_KEYS = ("clearance", "hysteresis", "astar_res", "astar_dev_weight")
    _PROCESSOR_KEYS = ("margin_long", "margin_lat", "dbscan_eps", "dbscan_min_pts",
                       "pedestrian_radius", "sample_spacing", "prediction_time",
                       "prediction_dt")

    @classmethod
    def from_overrides(cls, overrides: dict, risk_mode=False) -> "PipelineConfig":
        weight_keys = {f.name for f in fields(PlannerWeights)}
        w_over, h_over, p_over = {}, {}, {}
        for key, val in overrides.items():
            if key in weight_keys:
                w_over[key] = val
            elif key in cls._HARNESS_KEYS:
                h_over[key] = float(val)
            elif key in cls._PROCESSOR_KEYS:
                p_over[key] = int(val) if key == "dbscan_min_pts" else float(val)
            else:
                raise ValueError(f"unknown override key: {key!r}")
        return cls(
            weights=PlannerWeights().with_overrides(w_over),
            processor=replace(ProcessorConfig(), **p_over),
            risk_mode=risk_mode,
            **h_over,
        )


@dataclass
class CycleRecord:
    cycle: int
    t: float
    ego_s: float
    ego_d: float
    ego_phi: float
    ego_x: float
    ego_y: float
    ego_yaw: float
    path: np.ndarray            # planned (n, 2) [s, d]
    d_lb: np.ndarray
    d_ub: np.ndarray
    runtime: float              # full pipeline wall time, s
    status: str
    cost: float | None
    iterations: int | None
    max_violation: float | None
    alpha_sum: float | None     # total slack spent this cycle
    min_obstacle_distance: float | None
    collision: bool
    out_of_bounds: bool

    def to_dict(self) -> dict:
        return {
            "cycle": self.cycle,
            "t": self.t,
            "ego": {"s": self.ego_s, "d": self.ego_d, "phi": self.ego_phi,
                    "x": self.ego_x, "y": self.ego_y, "yaw": self.ego_yaw},
            "path": [[float(a), float(b)] for a, b in self.path],
            "d_lb": [float(v) for v in self.d_lb],
            "d_ub": [float(v) for v in self.d_ub],
            "runtime": self.runtime,
            "status": self.status,
            "cost": self.cost,
            "iterations": self.iterations,
            "max_violation": self.max_violation,
            "alpha_sum": self.alpha_sum,
            "min_obstacle_distance": self.min_obstacle_distance,
            "collision": self.collision,
            "out_of_bounds": self.out_of_bounds,
        }


@dataclass
class EpisodeLog:
    scenario: str
    planner: str
    seed: int
    records: list[CycleRecord] = field(default_factory=list)
    aborted: bool = False
    abort_cause: str | None = None

    @property
    def collided(self) -> bool:
        return any(r.collision for r in self.records)

    @property
    def left_road(self) -> bool:
        return any(r.out_of_bounds for r in self.records)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "planner": self.planner,
            "seed": self.seed,
            "aborted": self.aborted,
            "abort_cause": self.abort_cause,
            "cycles": len(self.records),
            "records": [r.to_dict() for r in self.records],
        }


def _static_risk_row(poly, n: int, ds: float, s0: float) -> np.ndarray:
    """Risk-deferred static obstacle: repel from its lateral center over the
    stations its footprint spans."""
    row = np.full(n, np.nan)
    k_lo = int(np.ceil((poly.min_s - s0) / ds))
    k_hi = int(np.floor((poly.max_s - s0) / ds))
    if k_hi < 0 or k_lo > n - 1:
        return row
    row[max(k_lo, 0):min(k_hi, n - 1) + 1] = 0.5 * (poly.min_d + poly.max_d)
    return row


def plan_cycle(ref: ReferencePath, road_lb: float, road_ub: float,
               perceived, state: SpaceState, cfg: PipelineConfig,
               governor: DecisionGovernor, planner: str = FCP,
               warm=None, warm_shift: int = 0):
    """One pipeline pass: obstacles -> decisions -> bounds -> path.

    road_lb/road_ub are centroid limits (ego half-width already folded into
    the processor margins). Returns (path, corridor, solution, cause) where
    solution is None for the baseline and cause is None unless planning
    failed.
    """
    w = cfg.weights
    n = w.n_steps + 1
    obs = build_obstacle_set(perceived, ref, n, w.ds, state.s, cfg.processor)

    lb_set, ub_set = [], []
    dyn_rows = []
    try:
        for poly in obs.polygons:
            if poly.is_dynamic:
                dyn_rows.append(poly.predicted_d)
                continue
            decision = governor.classify(poly.source, poly)
            if decision.label == Label.LOWER:
                lb_set.append(poly)
            elif decision.label == Label.UPPER:
                ub_set.append(poly)
            else:
                dyn_rows.append(_static_risk_row(poly, n, w.ds, state.s))
    except Blocked as exc:
        return None, None, None, f"blocked: {exc}"

    corridor = generate_bounds(lb_set, ub_set, road_lb, road_ub, n, w.ds, state.s)
    if not corridor.feasible():
        return None, corridor, None, "infeasible: corridor bounds cross"

    dyn = np.stack(dyn_rows, axis=0) if dyn_rows else None
    if planner == ASTAR:
        try:
            path = astar_baseline(corridor, state, cfg.astar_res, cfg.astar_dev_weight)
        except NoPath as exc:
            return None, corridor, None, f"no_path: {exc}"
        return path, corridor, None, None

    try:
        sol = solve(corridor, dyn, w, state, ref=ref, warm=warm, warm_shift=warm_shift)
    except EmptyActuationSet as exc:
        return None, corridor, None, f"empty_actuation: {exc}"
    if sol.status == SolveStatus.INFEASIBLE:
        return sol.path, corridor, sol, f"infeasible: violation {sol.max_violation:.3f}"
    return sol.path, corridor, sol, None


def _ego_frenet(ref: ReferencePath, sc: Scenario) -> SpaceState:
    s, d = ref.project(np.array([sc.ego.x, sc.ego.y]))
    phi = _wrap(sc.ego.yaw - ref.heading_at(s))
    return SpaceState(s=float(s), d=float(d), phi=float(phi))


def _advance_along(path: np.ndarray, s_now: float, dist: float):
    """Geometric follower: move dist along the polyline measured in arc
    length, returning (s, d, slope angle) at the new point."""
    seg = np.diff(path, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    start = float(np.interp(s_now, path[:, 0], cum))
    target = min(start + dist, cum[-1])
    i = int(np.searchsorted(cum, target, side="right") - 1)
    i = min(i, len(seg) - 1)
    frac = (target - cum[i]) / seg_len[i] if seg_len[i] > 0 else 0.0
    s = path[i, 0] + frac * seg[i, 0]
    d = path[i, 1] + frac * seg[i, 1]
    slope = float(np.arctan2(seg[i, 1], seg[i, 0]))
    return float(s), float(d), slope


def _true_polygons(sc: Scenario, t: float, ped_radius: float):
    polys = []
    for o in sc.obstacles:
        x, y, yaw = o.pose_at(t)
        if o.kind == PEDESTRIAN:
            ang = np.linspace(0.0, 2 * np.pi, 9)[:-1]
            polys.append(np.stack(
                [x + ped_radius * np.cos(ang), y + ped_radius * np.sin(ang)], axis=1
            ))
        else:
            polys.append(rect_corners(x, y, yaw, o.length, o.width))
    return polys


def run_episode(sc: Scenario, planner: str = FCP, seed: int = 0) -> EpisodeLog:
    """Simulate one scenario until end_s, abort, or cycle budget."""
    if planner not in (FCP, ASTAR):
        raise ValueError(f"unknown planner {planner!r}")
    cfg = PipelineConfig.from_overrides(sc.overrides, risk_mode=sc.risk_mode)
    ped_radius = cfg.processor.pedestrian_radius
    cfg.processor = cfg.processor.with_ego(sc.ego.length, sc.ego.width)
    half_w = sc.ego.width / 2
    road_lb = sc.road_lb + half_w   # centroid band
    road_ub = sc.road_ub - half_w

    ref = build_reference(sc.reference)
    governor = DecisionGovernor(road_lb, road_ub, ego_width=0.0,
                                clearance=cfg.clearance, risk_mode=cfg.risk_mode,
                                hysteresis=cfg.hysteresis)
    state = _ego_frenet(ref, sc)
    w = cfg.weights
    horizon = w.n_steps * w.ds
    end_s = min(sc.end_s, ref.length - horizon - 1e-6)
    if end_s <= state.s:
        raise ValueError(
            f"reference ({ref.length:.1f} m) leaves no room for the "
            f"{horizon:.1f} m planning horizon past s={state.s:.1f}")

    rng = np.random.default_rng(seed)
    log = EpisodeLog(scenario=sc.name, planner=planner, seed=seed)
    step_dist = sc.ego.speed * sc.cycle_period
    max_cycles = int(np.ceil((end_s - state.s) / max(step_dist, 1e-9))) + 10

    warm = None
    prev_s0 = state.s
    t = 0.0
    for cycle in range(max_cycles):
        if state.s >= end_s:
            break
        t_start = time.perf_counter()
        # fixed draw count per obstacle keeps the noise stream aligned across
        # planner choices and abort timings
        draws = rng.normal(size=(len(sc.obstacles), 3))
        perceived = [
            o.as_raw(t, dx=draws[i, 0] * sc.noise_pos,
                     dy=draws[i, 1] * sc.noise_pos,
                     dyaw=draws[i, 2] * sc.noise_yaw)
            for i, o in enumerate(sc.obstacles)
        ]
        shift = int(round((state.s - prev_s0) / w.ds)) if warm is not None else 0
        path, corridor, sol, cause = plan_cycle(
            ref, road_lb, road_ub, perceived, state, cfg, governor,
            planner=planner, warm=warm, warm_shift=max(0, shift),
        )
        runtime = time.perf_counter() - t_start
        if cause is not None or path is None:
            log.aborted = True
            log.abort_cause = cause or "no path"
            n_sts = corridor.n if corridor is not None else w.n_steps + 1
            log.records.append(CycleRecord(
                cycle=cycle, t=t, ego_s=state.s, ego_d=state.d, ego_phi=state.phi,
                ego_x=float("nan"), ego_y=float("nan"), ego_yaw=float("nan"),
                path=np.zeros((0, 2)),
                d_lb=corridor.d_lb if corridor is not None else np.full(n_sts, np.nan),
                d_ub=corridor.d_ub if corridor is not None else np.full(n_sts, np.nan),
                runtime=runtime, status="aborted", cost=None, iterations=None,
                max_violation=None, alpha_sum=None,
                min_obstacle_distance=None,
                collision=False, out_of_bounds=False,
            ))
            break
        prev_s0 = state.s
        warm = sol

        # advance the ego along the plan and audit the executed pose
        s_new, d_new, slope = _advance_along(path, state.s, step_dist)
        if sol is not None:
            phi_new = float(np.interp(s_new, sol.s, sol.phi))
        else:
            phi_new = slope
        x, y = frenet_to_cart((s_new, d_new), ref)
        yaw = ref.heading_at(s_new) + phi_new
        t += sc.cycle_period

        ego_poly = rect_corners(x, y, yaw, sc.ego.length, sc.ego.width)
        true_polys = _true_polygons(sc, t, ped_radius)
        dists = [polygon_distance(ego_poly, p) for p in true_polys]
        min_dist = float(min(dists)) if dists else None
        collided = any(polygons_intersect(ego_poly, p) for p in true_polys)
        _, corner_d, _ = ref.project_clipped(ego_poly)
        out = bool(np.any(corner_d < sc.road_lb - 1e-6)
                   or np.any(corner_d > sc.road_ub + 1e-6))

        log.records.append(CycleRecord(
            cycle=cycle, t=t, ego_s=s_new, ego_d=d_new, ego_phi=phi_new,
            ego_x=float(x), ego_y=float(y), ego_yaw=float(yaw),
            path=path, d_lb=corridor.d_lb.copy(), d_ub=corridor.d_ub.copy(),
            runtime=runtime, status=sol.status.value if sol is not None else "grid",
            cost=sol.cost if sol is not None else None,
            iterations=sol.iterations if sol is not None else None,
            max_violation=sol.max_violation if sol is not None else None,
            alpha_sum=float(sol.controls.alpha.sum()) if sol is not None else None,
            min_obstacle_distance=min_dist, collision=collided, out_of_bounds=out,
        ))
        state = SpaceState(s=s_new, d=d_new, phi=phi_new)
    return log
