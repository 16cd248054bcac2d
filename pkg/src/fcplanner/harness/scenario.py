"""Scenario definitions and JSON (de)serialization.

A scenario bundles everything an episode needs: the reference polyline,
physical road limits, the ego vehicle's start, scripted obstacles, a
perception noise model, and planner overrides. Dynamic obstacles move with
constant velocity; that is the only motion script supported.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ..frenet import build_reference
from ..obstacles import PEDESTRIAN, VEHICLE, RawObstacle

_EGO_KEYS = {"x", "y", "yaw", "speed", "length", "width"}
_OBS_KEYS = {"kind", "x", "y", "yaw", "length", "width", "vx", "vy", "dynamic"}
_TOP_KEYS = {"name", "reference", "road", "ego", "obstacles", "noise",
             "cycle_period", "end_s", "overrides", "risk_mode"}


@dataclass
class EgoConfig:
    x: float
    y: float
    yaw: float = 0.0
    speed: float = 8.0
    length: float = 4.5
    width: float = 2.0

    def __post_init__(self):
        if self.speed <= 0:
            raise ValueError("ego speed must be positive")
        if self.length <= 0 or self.width <= 0:
            raise ValueError("ego footprint must be positive")


@dataclass
class ScriptedObstacle:
    kind: str
    x: float
    y: float
    yaw: float = 0.0
    length: float = 0.0
    width: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    dynamic: bool = False

    def __post_init__(self):
        if self.kind not in (VEHICLE, PEDESTRIAN):
            raise ValueError(f"unknown obstacle kind {self.kind!r}")
        if self.kind == VEHICLE and (self.length <= 0 or self.width <= 0):
            raise ValueError("vehicle obstacles need a positive footprint")

    def pose_at(self, t: float):
        """Constant-velocity pose at time t; yaw does not change."""
        return self.x + self.vx * t, self.y + self.vy * t, self.yaw

    def as_raw(self, t: float = 0.0, dx=0.0, dy=0.0, dyaw=0.0) -> RawObstacle:
        """Snapshot at time t with optional pose perturbation applied."""
        x, y, yaw = self.pose_at(t)
        return RawObstacle(
            kind=self.kind, x=x + dx, y=y + dy, yaw=yaw + dyaw,
            length=self.length, width=self.width,
            vx=self.vx, vy=self.vy, dynamic=self.dynamic,
        )


@dataclass
class Scenario:
    name: str
    reference: np.ndarray
    road_lb: float
    road_ub: float
    ego: EgoConfig
    obstacles: list[ScriptedObstacle] = field(default_factory=list)
    noise_pos: float = 0.1
    noise_yaw: float = 0.02
    cycle_period: float = 0.1
    end_s: float = 100.0
    overrides: dict = field(default_factory=dict)
    risk_mode: bool = False

    def __post_init__(self):
        self.reference = np.asarray(self.reference, dtype=float)
        self.validate()

    def validate(self):
        if self.road_lb >= self.road_ub:
            raise ValueError("road lower limit must be below the upper limit")
        if self.cycle_period <= 0:
            raise ValueError("cycle period must be positive")
        if self.end_s <= 0:
            raise ValueError("end_s must be positive")
        if self.noise_pos < 0 or self.noise_yaw < 0:
            raise ValueError("noise levels must be nonnegative")
        ref = build_reference(self.reference)
        _, d = ref.project(np.array([self.ego.x, self.ego.y]))
        if not self.road_lb <= d <= self.road_ub:
            raise ValueError(
                f"ego starts at lateral offset {d:.2f}, outside road limits "
                f"[{self.road_lb}, {self.road_ub}]"
            )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "reference": [[float(x), float(y)] for x, y in self.reference],
            "road": {"lower": self.road_lb, "upper": self.road_ub},
            "ego": {
                "x": self.ego.x, "y": self.ego.y, "yaw": self.ego.yaw,
                "speed": self.ego.speed, "length": self.ego.length,
                "width": self.ego.width,
            },
            "obstacles": [
                {
                    "kind": o.kind, "x": o.x, "y": o.y, "yaw": o.yaw,
                    "length": o.length, "width": o.width,
                    "vx": o.vx, "vy": o.vy, "dynamic": o.dynamic,
                }
                for o in self.obstacles
            ],
            "noise": {"pos_std": self.noise_pos, "yaw_std": self.noise_yaw},
            "cycle_period": self.cycle_period,
            "end_s": self.end_s,
            "overrides": dict(self.overrides),
            "risk_mode": self.risk_mode,
        }


def _reject_unknown(d: dict, allowed: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown {where} keys: {sorted(unknown)}")


def scenario_from_dict(data: dict) -> Scenario:
    _reject_unknown(data, _TOP_KEYS, "scenario")
    for req in ("name", "reference", "road", "ego"):
        if req not in data:
            raise ValueError(f"scenario is missing required key {req!r}")
    road = data["road"]
    _reject_unknown(road, {"lower", "upper"}, "road")
    ego_d = data["ego"]
    _reject_unknown(ego_d, _EGO_KEYS, "ego")
    obstacles = []
    for od in data.get("obstacles", []):
        _reject_unknown(od, _OBS_KEYS, "obstacle")
        obstacles.append(ScriptedObstacle(**od))
    noise = data.get("noise", {})
    _reject_unknown(noise, {"pos_std", "yaw_std"}, "noise")
    return Scenario(
        name=data["name"],
        reference=data["reference"],
        road_lb=float(road["lower"]),
        road_ub=float(road["upper"]),
        ego=EgoConfig(**ego_d),
        obstacles=obstacles,
        noise_pos=float(noise.get("pos_std", 0.1)),
        noise_yaw=float(noise.get("yaw_std", 0.02)),
        cycle_period=float(data.get("cycle_period", 0.1)),
        end_s=float(data.get("end_s", 100.0)),
        overrides=dict(data.get("overrides", {})),
        risk_mode=bool(data.get("risk_mode", False)),
    )


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


def save_scenario(sc: Scenario, path):
    with open(path, "w") as fh:
        json.dump(sc.to_dict(), fh, indent=2)
        fh.write("\n")
