"""Reference-path geometry and Cartesian to road-aligned transforms.

The reference is stored as a resampled polyline with linearly interpolated
position and heading. Projection starts from the nearest polyline vertex and
refines the station with a damped Newton iteration on the tangency residual
g(s) = (p - c(s)) . t(s), where t is the interpolated tangent. Because the
inverse transform uses the same interpolated frame, a projection followed by
reconstruction returns to the original point up to solver tolerance.

Lateral offsets are signed positive to the left of the direction of travel.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateReference, OutOfDomain

_NEWTON_STEPS = 60
_NEWTON_TOL = 1e-11


@dataclass(frozen=True)
class FrenetPoint:
    s: float
    d: float


@dataclass(frozen=True)
class ReferencePath:
    """Resampled reference polyline; immutable after construction."""

    waypoints: np.ndarray       # (m, 2) resampled vertices
    cum_arclength: np.ndarray   # (m,) cumulative chord length, starts at 0
    heading: np.ndarray         # (m,) unwrapped tangent angles
    spacing: float              # resample step used at build time

    def __post_init__(self):
        for arr in (self.waypoints, self.cum_arclength, self.heading):
            arr.setflags(write=False)

    @property
    def length(self) -> float:
        return float(self.cum_arclength[-1])

    @cached_property
    def _tree(self):
        return cKDTree(self.waypoints)

    @cached_property
    def _segment_curvature(self):
        return np.diff(self.heading) / np.diff(self.cum_arclength)

    def position(self, s):
        s = np.asarray(s, dtype=float)
        x = np.interp(s, self.cum_arclength, self.waypoints[:, 0])
        y = np.interp(s, self.cum_arclength, self.waypoints[:, 1])
        return np.stack([x, y], axis=-1)

    def heading_at(self, s):
        return np.interp(s, self.cum_arclength, self.heading)

    def heading_delta(self, s0, step, n):
        """Tangent-angle change over each of n planning steps starting at s0.

        Stations beyond the path extent reuse the end heading, so the
        returned deltas taper to zero there.
        """
        if n < 1:
            raise ValueError("need at least one step")
        stations = s0 + step * np.arange(n + 1)
        return np.diff(self.heading_at(stations))

    def _refine(self, pts, s):
        """Damped Newton on the tangency residual; returns station, offset, overshoot."""
        cum = self.cum_arclength
        top = self.length
        kappa = self._segment_curvature
        for _ in range(_NEWTON_STEPS):
            c = self.position(s)
            h = self.heading_at(s)
            tx, ty = np.cos(h), np.sin(h)
            rx, ry = pts[:, 0] - c[:, 0], pts[:, 1] - c[:, 1]
            g = rx * tx + ry * ty
            d_est = -rx * ty + ry * tx
            seg = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(kappa) - 1)
            # g'(s) is close to d*kappa - 1; keep it negative so steps descend
            gp = np.minimum(-1.0 + d_est * kappa[seg], -0.2)
            step = np.clip(-g / gp, -self.spacing, self.spacing)
            new_s = np.clip(s + step, 0.0, top)
            done = np.all(np.abs(new_s - s) < _NEWTON_TOL)
            s = new_s
            if done:
                break
        c = self.position(s)
        h = self.heading_at(s)
        tx, ty = np.cos(h), np.sin(h)
        rx, ry = pts[:, 0] - c[:, 0], pts[:, 1] - c[:, 1]
        g = rx * tx + ry * ty
        d = -rx * ty + ry * tx
        over = np.zeros(len(pts))
        at_start = s <= 0.0
        at_end = s >= top
        over[at_start] = np.maximum(0.0, -g[at_start])
        over[at_end] = np.maximum(over[at_end], g[at_end])
        return s, d, over

    def project_many(self, points, tol=None):
        """Project points onto the path; raises when any falls beyond the ends."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if tol is None:
            tol = self.spacing
        _, idx = self._tree.query(pts)
        s0 = self.cum_arclength[idx].astype(float)
        s, d, over = self._refine(pts, s0)
        if np.any(over > tol):
            k = int(np.argmax(over))
            raise OutOfDomain(
                f"point ({pts[k, 0]:.2f}, {pts[k, 1]:.2f}) lies {over[k]:.2f} m "
                "beyond the reference extent"
            )
        return s, d

    def project_clipped(self, points):
        """Like project_many but clamps at the ends; also reports which stayed inside."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        _, idx = self._tree.query(pts)
        s0 = self.cum_arclength[idx].astype(float)
        s, d, over = self._refine(pts, s0)
        return s, d, over <= self.spacing

    def project(self, p, tol=None):
        s, d = self.project_many(np.asarray(p, dtype=float)[None, :], tol=tol)
        return float(s[0]), float(d[0])


def build_reference(waypoints, resample_spacing=0.5):
    """Resample a waypoint polyline into a ReferencePath.

    Arc length is the cumulative chord length of the resampled vertices and
    headings come from central differences, so downstream interpolation stays
    consistent with the stored geometry.
    """
    pts = np.asarray(waypoints, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise DegenerateReference("need at least two 2-D waypoints")
    if not np.all(np.isfinite(pts)):
        raise DegenerateReference("waypoints must be finite")
    if resample_spacing <= 0:
        raise ValueError("resample_spacing must be positive")
    chord = np.hypot(*np.diff(pts, axis=0).T)
    if np.any(chord < 1e-12):
        raise DegenerateReference("consecutive waypoints coincide")
    s_in = np.concatenate([[0.0], np.cumsum(chord)])
    total = float(s_in[-1])
    if total < resample_spacing:
        raise DegenerateReference(
            f"reference length {total:.3g} m is below one sample step"
        )
    m = max(int(np.ceil(total / resample_spacing)) + 1, 2)
    grid = np.linspace(0.0, total, m)
    x = np.interp(grid, s_in, pts[:, 0])
    y = np.interp(grid, s_in, pts[:, 1])
    seg = np.hypot(np.diff(x), np.diff(y))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    heading = np.empty(m)
    heading[1:-1] = np.arctan2(y[2:] - y[:-2], x[2:] - x[:-2])
    heading[0] = np.arctan2(y[1] - y[0], x[1] - x[0])
    heading[-1] = np.arctan2(y[-1] - y[-2], x[-1] - x[-2])
    heading = np.unwrap(heading)
    if np.any(np.abs(np.diff(heading)) >= np.pi / 2):
        raise DegenerateReference("kinked reference: heading jump of pi/2 or more")
    return ReferencePath(
        waypoints=np.stack([x, y], axis=1),
        cum_arclength=cum,
        heading=heading,
        spacing=float(grid[1] - grid[0]),
    )


def cart_to_frenet(p, ref: ReferencePath, tol=None) -> FrenetPoint:
    """Project a Cartesian point onto the reference. Left of travel is positive d."""
    s, d = ref.project(p, tol=tol)
    return FrenetPoint(s=s, d=d)


def cart_to_frenet_many(points, ref: ReferencePath, tol=None):
    return ref.project_many(points, tol=tol)


def frenet_to_cart(point, ref: ReferencePath):
    """Map a (s, d) pair back to Cartesian coordinates."""
    if isinstance(point, FrenetPoint):
        s, d = point.s, point.d
    else:
        s, d = point
    out = frenet_to_cart_many(np.array([s], dtype=float), np.array([d], dtype=float), ref)
    return out[0]


def frenet_to_cart_many(s, d, ref: ReferencePath):
    s = np.asarray(s, dtype=float)
    d = np.asarray(d, dtype=float)
    if np.any(s < -1e-9) or np.any(s > ref.length + 1e-9):
        raise OutOfDomain("station outside the reference extent")
    c = ref.position(s)
    h = ref.heading_at(s)
    normal = np.stack([-np.sin(h), np.cos(h)], axis=-1)
    return c + d[..., None] * normal
