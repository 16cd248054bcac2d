"""Deviation-side assignment for static obstacles.

Each obstacle either raises the corridor floor (the ego passes above it),
lowers the corridor ceiling (the ego passes below), or is deferred to the
optimizer's risk term. The choice follows the free lateral gap on each side.
"""

from dataclasses import dataclass
from enum import Enum

from .errors import Blocked
from .obstacles import ObstaclePolygon


class Label(str, Enum):
    LOWER = "lower"   # obstacle bounds the corridor floor; ego passes above
    UPPER = "upper"   # obstacle bounds the corridor ceiling; ego passes below
    RISK = "risk"


@dataclass(frozen=True)
class DeviationDecision:
    label: Label
    lower_gap: float
    upper_gap: float


def _flip(label: Label) -> Label:
    return Label.UPPER if label is Label.LOWER else Label.LOWER


def _prefer(lower_gap, upper_gap, poly) -> Label:
    if upper_gap > lower_gap:
        return Label.LOWER
    if lower_gap > upper_gap:
        return Label.UPPER
    # equal gaps: keep the side whose gap contains the reference line
    if poly.min_d > 0.0:
        return Label.UPPER
    if poly.max_d < 0.0:
        return Label.LOWER
    return Label.LOWER


def classify_obstacle(poly: ObstaclePolygon, road_lb: float, road_ub: float,
                      ego_width: float, clearance=0.25, risk_mode=False,
                      incumbent: Label | None = None, hysteresis=0.3) -> DeviationDecision:
    """Pick which corridor bound an obstacle should tighten.

    Gaps are measured between the polygon extremes and the road limits. When
    only one side is passable the label is forced; with both passable the
    larger gap wins (or the obstacle defers to the risk term in risk mode),
    and an incumbent label from the previous cycle only flips when the other
    gap wins by more than the hysteresis margin.
    """
    if road_lb >= road_ub:
        raise ValueError("road limits must satisfy road_lb < road_ub")
    lower_gap = max(0.0, poly.min_d - road_lb)
    upper_gap = max(0.0, road_ub - poly.max_d)
    passable = ego_width + 2.0 * clearance
    lower_ok = lower_gap >= passable
    upper_ok = upper_gap >= passable
    if not lower_ok and not upper_ok:
        raise Blocked(
            f"no passable gap: lower {lower_gap:.2f} m, upper {upper_gap:.2f} m, "
            f"need {passable:.2f} m"
        )
    if lower_ok and upper_ok:
        if risk_mode:
            label = Label.RISK
        elif incumbent in (Label.LOWER, Label.UPPER):
            keep_gap = upper_gap if incumbent is Label.LOWER else lower_gap
            other_gap = lower_gap if incumbent is Label.LOWER else upper_gap
            label = incumbent if other_gap <= keep_gap + hysteresis else _flip(incumbent)
        else:
            label = _prefer(lower_gap, upper_gap, poly)
    else:
        label = Label.LOWER if upper_ok else Label.UPPER
    return DeviationDecision(label=label, lower_gap=lower_gap, upper_gap=upper_gap)


class DecisionGovernor:
    """Classifier with per-obstacle hysteresis memory across planning cycles."""

    def __init__(self, road_lb, road_ub, ego_width=0.0, clearance=0.25,
                 risk_mode=False, hysteresis=0.3):
        self.road_lb = float(road_lb)
        self.road_ub = float(road_ub)
        self.ego_width = float(ego_width)
        self.clearance = float(clearance)
        self.risk_mode = bool(risk_mode)
        self.hysteresis = float(hysteresis)
        self._memory: dict = {}

    def classify(self, key, poly: ObstaclePolygon) -> DeviationDecision:
        dec = classify_obstacle(
            poly, self.road_lb, self.road_ub, self.ego_width, self.clearance,
            risk_mode=self.risk_mode, incumbent=self._memory.get(key),
            hysteresis=self.hysteresis,
        )
        if dec.label is not Label.RISK:
            self._memory[key] = dec.label
        return dec

    def partition(self, polys, keys=None):
        """Split polygons into (floor set, ceiling set, risk set)."""
        if keys is None:
            keys = range(len(polys))
        lb_set, ub_set, risk_set = [], [], []
        for key, poly in zip(keys, polys):
            dec = self.classify(key, poly)
            if dec.label is Label.LOWER:
                lb_set.append(poly)
            elif dec.label is Label.UPPER:
                ub_set.append(poly)
            else:
                risk_set.append(poly)
        return lb_set, ub_set, risk_set
