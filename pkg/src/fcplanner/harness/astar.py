"""Grid A* baseline over the corridor.

The corridor is discretized into lateral levels at fixed resolution; nodes
are (station, level) cells whose level lies inside the station's bounds.
Moves advance one station (straight or diagonal) or slide one level within
the current station. Edge cost is the Cartesian step length plus a deviation
weight pulling toward d = 0; the heuristic is the remaining forward distance.
"""

import heapq

import numpy as np

from ..corridor import Corridor
from ..errors import NoPath
from ..optimizer import SpaceState


def astar_baseline(corridor: Corridor, init: SpaceState, lateral_res=0.25,
                   dev_weight=0.5) -> np.ndarray:
    """Cheapest grid path from the ego cell to the last station.

    Returns (n, 2) waypoints [s, d], one per station: the level the path
    finally occupies at each station. Raises NoPath when the grid is
    disconnected.
    """
    if lateral_res <= 0:
        raise ValueError("lateral_res must be positive")
    n = corridor.n
    ds = corridor.ds
    levels = np.arange(corridor.l_lb, corridor.l_ub + 1e-9, lateral_res)
    if len(levels) == 0:
        raise NoPath("road band narrower than one grid cell")
    m = len(levels)

    valid = (levels[None, :] >= corridor.d_lb[:, None] - 1e-9) & (
        levels[None, :] <= corridor.d_ub[:, None] + 1e-9
    )
    start_col = np.where(valid[0])[0]
    if len(start_col) == 0:
        raise NoPath("no admissible cell at the first station")
    j0 = int(start_col[np.argmin(np.abs(levels[start_col] - init.d))])

    def h(k):
        return (n - 1 - k) * ds

    trace = [(-1, j0, 0)]  # (parent trace index, level index, station)
    heap = [(h(0), 0.0, 0, 0, j0)]
    best = {(0, j0): 0.0}
    goal_idx = None
    while heap:
        f, g, ti, k, j = heapq.heappop(heap)
        if g > best.get((k, j), np.inf) + 1e-12:
            continue
        if k == n - 1:
            goal_idx = ti
            break
        for dk, dj in ((1, -1), (1, 0), (1, 1), (0, -1), (0, 1)):
            k2, j2 = k + dk, j + dj
            if k2 >= n or not 0 <= j2 < m or not valid[k2, j2]:
                continue
            step = float(np.hypot(dk * ds, dj * lateral_res))
            g2 = g + step + dev_weight * abs(levels[j2])
            if g2 < best.get((k2, j2), np.inf) - 1e-12:
                best[(k2, j2)] = g2
                trace.append((ti, j2, k2))
                heapq.heappush(heap, (g2 + h(k2), g2, len(trace) - 1, k2, j2))
    if goal_idx is None:
        raise NoPath("corridor grid is disconnected")

    # walking the trace backwards visits each station's final level first
    d_out = np.full(n, np.nan)
    ti = goal_idx
    while ti != -1:
        parent, j, k = trace[ti]
        if np.isnan(d_out[k]):
            d_out[k] = levels[j]
        ti = parent
    if np.any(np.isnan(d_out)):
        raise NoPath("grid path does not span all stations")
    return np.stack([corridor.stations, d_out], axis=1)
