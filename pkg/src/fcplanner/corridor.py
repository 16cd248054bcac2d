"""Drivable-corridor bounds over the planning horizon."""

from dataclasses import dataclass

import numpy as np


@dataclass
class Corridor:
    """Per-station lateral bounds for the path centroid."""

    s0: float
    ds: float
    d_lb: np.ndarray
    d_ub: np.ndarray
    l_lb: float  # road lower limit the bounds were initialised from
    l_ub: float

    @property
    def n(self) -> int:
        return len(self.d_lb)

    @property
    def stations(self) -> np.ndarray:
        return self.s0 + self.ds * np.arange(self.n)

    def feasible(self, ego_width=0.0) -> bool:
        return bool(np.all(self.d_lb + ego_width <= self.d_ub))

    @property
    def obstacle_mask(self) -> np.ndarray:
        """True at stations where an obstacle tightened either bound."""
        return (self.d_lb > self.l_lb) | (self.d_ub < self.l_ub)

    @property
    def midline(self) -> np.ndarray:
        return 0.5 * (self.d_lb + self.d_ub)

    def to_rows(self):
        return [
            {"k": k, "s": float(s), "d_lb": float(lb), "d_ub": float(ub)}
            for k, (s, lb, ub) in enumerate(zip(self.stations, self.d_lb, self.d_ub))
        ]


def generate_bounds(lb_set, ub_set, l_lb: float, l_ub: float, n: int, ds: float,
                    s0: float, stats: dict | None = None) -> Corridor:
    """Tighten road limits with obstacle boundary points in one pass.

    Every point of a floor-set polygon raises d_lb in its station cell
    ind = floor((p_s - s0) / ds), ceiling-set points lower d_ub likewise.
    The same value also applies to cell ind + 1 so a box ending just after a
    station still covers the next one; both updates take the per-cell
    extremum, which keeps the result independent of point order. Points
    outside the horizon are skipped.
    """
    if ds <= 0:
        raise ValueError("ds must be positive")
    if n < 2:
        raise ValueError("need at least two stations")
    if l_lb >= l_ub:
        raise ValueError("road limits must satisfy l_lb < l_ub")
    shared = {id(p) for p in lb_set} & {id(p) for p in ub_set}
    if shared:
        raise ValueError("an obstacle cannot sit in both bound sets")

    d_lb = np.full(n, float(l_lb))
    d_ub = np.full(n, float(l_ub))
    visited = 0
    for polys, arr, op in ((lb_set, d_lb, np.maximum), (ub_set, d_ub, np.minimum)):
        for poly in polys:
            pts = poly.points()
            visited += len(pts)
            ind = np.floor((pts[:, 0] - s0) / ds).astype(int)
            keep = (ind >= 0) & (ind <= n - 1)
            ind = ind[keep]
            pd = pts[keep, 1]
            op.at(arr, ind, pd)
            spill = ind <= n - 2
            op.at(arr, ind[spill] + 1, pd[spill])
    if stats is not None:
        stats["points_visited"] = visited
    return Corridor(s0=float(s0), ds=float(ds), d_lb=d_lb, d_ub=d_ub,
                    l_lb=float(l_lb), l_ub=float(l_ub))
