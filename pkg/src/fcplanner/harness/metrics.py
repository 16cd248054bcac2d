"""Episode scoring.

Yaw and lateral metrics are computed on the executed trajectory: the sequence
of ego poses actually driven, each taken from the planner output active during
that cycle. Scoring the driven path keeps the comparison symmetric across
planners; full per-cycle planned horizons stay available in the episode log
for diagnostics. Obstacle distances come from the per-cycle audit of the
executed ego footprint against true (noise-free) obstacle polygons.
"""

from dataclasses import dataclass

import numpy as np

from .episode import EpisodeLog


def wrap_angle(a):
    """Map angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2 * np.pi)


@dataclass
class MetricsReport:
    m_t: float        # mean planning time per cycle, s
    m_my: float       # max |delta yaw| between consecutive executed poses, rad
    m_ay: float       # mean |delta yaw|, rad
    m_l: float        # mean |lateral offset| of executed poses, m
    m_md: float | None  # min distance to nearest obstacle over the episode, m
    m_ad: float | None  # mean per-cycle nearest obstacle distance, m
    passed: bool
    cycles: int = 0
    aborted: bool = False
    abort_cause: str | None = None

    def to_dict(self) -> dict:
        return {
            "M_t": self.m_t,
            "M_my": self.m_my,
            "M_ay": self.m_ay,
            "M_l": self.m_l,
            "M_md": self.m_md,
            "M_ad": self.m_ad,
            "passed": self.passed,
            "cycles": self.cycles,
            "aborted": self.aborted,
            "abort_cause": self.abort_cause,
        }


def executed_yaw_deltas(log: EpisodeLog) -> np.ndarray:
    """|yaw step| between consecutive driven poses, aborted tail excluded."""
    yaws = np.array([r.ego_yaw for r in log.records if len(r.path)])
    if yaws.size < 2:
        return np.zeros(0)
    return np.abs(wrap_angle(np.diff(yaws)))


def compute_metrics(log: EpisodeLog) -> MetricsReport:
    if not log.records:
        raise ValueError("cannot score an empty episode log")

    runtimes = [r.runtime for r in log.records]
    deltas = executed_yaw_deltas(log)
    lat = np.array([abs(r.ego_d) for r in log.records if len(r.path)])
    dists = [r.min_obstacle_distance for r in log.records
             if r.min_obstacle_distance is not None]

    m_my = float(deltas.max()) if len(deltas) else 0.0
    m_ay = float(deltas.mean()) if len(deltas) else 0.0
    m_l = float(lat.mean()) if len(lat) else 0.0
    m_md = float(min(dists)) if dists else None
    m_ad = float(np.mean(dists)) if dists else None

    passed = (not log.aborted) and not log.collided and not log.left_road
    return MetricsReport(
        m_t=float(np.mean(runtimes)),
        m_my=m_my,
        m_ay=m_ay,
        m_l=m_l,
        m_md=m_md,
        m_ad=m_ad,
        passed=passed,
        cycles=len(log.records),
        aborted=log.aborted,
        abort_cause=log.abort_cause,
    )
