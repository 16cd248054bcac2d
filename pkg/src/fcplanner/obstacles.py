"""Obstacle ingestion for the corridor pipeline.

Vehicles become safety-inflated oriented boxes, pedestrians are density
clustered and wrapped in convex hulls, and dynamic obstacles additionally get
a constant-velocity lateral prediction sampled on the planning stations. All
polygons live in road-aligned (s, d) coordinates.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry
from .errors import OutOfDomain
from .frenet import ReferencePath, cart_to_frenet_many

VEHICLE = "vehicle"
PEDESTRIAN = "pedestrian"


@dataclass
class RawObstacle:
    kind: str
    x: float
    y: float
    yaw: float = 0.0
    length: float = 0.0
    width: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    dynamic: bool = False
    noise_std: tuple | None = None  # optional (pos_std, yaw_std) override

    def __post_init__(self):
        if self.kind not in (VEHICLE, PEDESTRIAN):
            raise ValueError(f"unknown obstacle kind {self.kind!r}")
        if self.kind == VEHICLE and (self.length <= 0 or self.width <= 0):
            raise ValueError("vehicle obstacles need a positive footprint")

    @property
    def speed(self) -> float:
        return float(np.hypot(self.vx, self.vy))

    @property
    def is_dynamic(self) -> bool:
        return self.dynamic or self.speed > 1e-9


@dataclass
class ObstaclePolygon:
    """Convex footprint in (s, d) with boundary samples for bound generation."""

    vertices: np.ndarray       # (v, 2), counterclockwise
    edge_samples: np.ndarray   # (e, 2), on the boundary, includes all vertices
    is_dynamic: bool = False
    predicted_d: np.ndarray | None = None  # (n,) with NaN where never reached
    source: tuple = ()         # indices of the raw obstacles behind this footprint

    def __post_init__(self):
        self.vertices = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        self.edge_samples = np.atleast_2d(np.asarray(self.edge_samples, dtype=float))
        if self.is_dynamic != (self.predicted_d is not None):
            raise ValueError("predicted_d must be present exactly for dynamic obstacles")
        if len(self.vertices) >= 3:
            a = self.vertices
            b = np.roll(a, -1, axis=0)
            c = np.roll(a, -2, axis=0)
            turn = (b[:, 0] - a[:, 0]) * (c[:, 1] - b[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - b[:, 0])
            if np.any(turn < -1e-9):
                raise ValueError("polygon must be convex and counterclockwise")

    def points(self) -> np.ndarray:
        return self.edge_samples

    @property
    def min_s(self) -> float:
        return float(self.vertices[:, 0].min())

    @property
    def max_s(self) -> float:
        return float(self.vertices[:, 0].max())

    @property
    def min_d(self) -> float:
        return float(self.vertices[:, 1].min())

    @property
    def max_d(self) -> float:
        return float(self.vertices[:, 1].max())


@dataclass
class ObstacleSet:
    polygons: list[ObstaclePolygon] = field(default_factory=list)

    @property
    def dynamic_count(self) -> int:
        return sum(1 for p in self.polygons if p.is_dynamic)

    @property
    def statics(self) -> list[ObstaclePolygon]:
        return [p for p in self.polygons if not p.is_dynamic]

    @property
    def dynamics(self) -> list[ObstaclePolygon]:
        return [p for p in self.polygons if p.is_dynamic]


def _octagon(center, radius):
    ang = np.arange(8) * (np.pi / 4.0)
    return center + radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def _capsule_hexagon(a, b, radius):
    e = b - a
    e = e / np.hypot(*e)
    n = np.array([-e[1], e[0]])
    return np.array([
        a - radius * e,
        a - radius * n,
        b - radius * n,
        b + radius * e,
        b + radius * n,
        a + radius * n,
    ])


def convex_hull(points, pad_radius=0.3, sample_spacing=0.25,
                is_dynamic=False, predicted_d=None) -> ObstaclePolygon:
    """Minimal convex polygon around points, padded when the hull degenerates.

    A single point becomes a regular octagon of circumradius pad_radius, a
    collinear set a hexagon approximating the padded segment. Proper hulls
    are returned as-is.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) == 0:
        raise ValueError("need at least one point")
    hull = geometry.convex_hull_points(pts)
    if len(hull) == 1:
        poly = _octagon(hull[0], pad_radius)
    elif len(hull) == 2:
        poly = _capsule_hexagon(hull[0], hull[1], pad_radius)
    else:
        poly = hull
    samples = geometry.sample_edges(poly, sample_spacing)
    return ObstaclePolygon(poly, samples, is_dynamic=is_dynamic, predicted_d=predicted_d)


def inflate_vehicle(o: RawObstacle, ref: ReferencePath, margin_long=0.5,
                    margin_lat=0.3, sample_spacing=0.25,
                    is_dynamic=False, predicted_d=None) -> ObstaclePolygon:
    """Safety-inflated vehicle box, convexified in road coordinates.

    The footprint grows by margin_long ahead and behind and margin_lat on
    each side. Boundary points sampled every sample_spacing are transformed
    before taking the hull, so curvature distortion is absorbed instead of
    cutting the corners.
    """
    if o.kind != VEHICLE:
        raise ValueError("expected a vehicle obstacle")
    corners = geometry.rect_corners(
        o.x, o.y, o.yaw, o.length + 2.0 * margin_long, o.width + 2.0 * margin_lat
    )
    boundary = geometry.sample_edges(corners, sample_spacing)
    s, d = cart_to_frenet_many(boundary, ref)
    return convex_hull(
        np.stack([s, d], axis=1),
        pad_radius=1e-6,
        sample_spacing=sample_spacing,
        is_dynamic=is_dynamic,
        predicted_d=predicted_d,
    )


def cluster_pedestrians(peds, ref: ReferencePath, eps=1.5, min_pts=2):
    """Density clustering of pedestrian positions in (s, d) space.

    Returns (clusters, noise) as lists of indices into peds. A point is a
    core point when at least min_pts inputs (itself included) fall within
    eps; clusters are the connected components of core points, border points
    join the cluster of their nearest core neighbour. The outcome does not
    depend on input order.
    """
    if not peds:
        return [], []
    for p in peds:
        if p.kind != PEDESTRIAN:
            raise ValueError("clustering expects pedestrian obstacles only")
    pos = np.array([[p.x, p.y] for p in peds], dtype=float)
    s, d = cart_to_frenet_many(pos, ref)
    pts = np.stack([s, d], axis=1)
    n = len(pts)
    diff = pts[:, None, :] - pts[None, :, :]
    dist2 = (diff * diff).sum(axis=2)
    neighb = dist2 <= eps * eps
    core = neighb.sum(axis=1) >= min_pts

    labels = np.full(n, -1, dtype=int)
    cluster_id = 0
    for i in range(n):
        if not core[i] or labels[i] >= 0:
            continue
        stack = [i]
        labels[i] = cluster_id
        while stack:
            j = stack.pop()
            for k in np.nonzero(neighb[j] & core)[0]:
                if labels[k] < 0:
                    labels[k] = cluster_id
                    stack.append(int(k))
        cluster_id += 1

    noise = []
    for i in range(n):
        if core[i]:
            continue
        core_nb = np.nonzero(neighb[i] & core)[0]
        if len(core_nb):
            nearest = core_nb[np.argmin(dist2[i, core_nb])]
            labels[i] = labels[nearest]
        else:
            noise.append(i)
    clusters = [sorted(np.nonzero(labels == cid)[0].tolist()) for cid in range(cluster_id)]
    return clusters, sorted(noise)


def predict_dynamic(o: RawObstacle, ref: ReferencePath, n: int, ds: float, s0: float,
                    horizon_time=10.0, dt=0.05) -> np.ndarray:
    """Lateral offsets where a constant-velocity obstacle crosses the stations.

    Entry k holds the predicted d at the time the obstacle's station passes
    s0 + k*ds; stations it never reaches within the horizon stay NaN. The
    obstacle's current cell is always marked.
    """
    if not o.is_dynamic:
        raise ValueError("obstacle is not dynamic")
    if n < 1 or ds <= 0:
        raise ValueError("need a positive horizon")
    t = np.arange(0.0, horizon_time + 0.5 * dt, dt)
    xy = np.stack([o.x + o.vx * t, o.y + o.vy * t], axis=1)
    s_tr, d_tr, inside = ref.project_clipped(xy)
    if not inside[0]:
        raise OutOfDomain("dynamic obstacle starts outside the reference extent")
    stop = np.argmin(inside) if not inside.all() else len(inside)
    s_tr, d_tr = s_tr[:stop], d_tr[:stop]

    predicted = np.full(n, np.nan)
    k0 = int(round((s_tr[0] - s0) / ds))
    if 0 <= k0 < n:
        predicted[k0] = d_tr[0]
    stations = s0 + ds * np.arange(n)
    for i in range(len(s_tr) - 1):
        a, b = s_tr[i], s_tr[i + 1]
        lo, hi = (a, b) if a <= b else (b, a)
        k_lo = int(np.ceil((lo - s0) / ds - 1e-12))
        k_hi = int(np.floor((hi - s0) / ds + 1e-12))
        for k in range(max(k_lo, 0), min(k_hi, n - 1) + 1):
            if not np.isnan(predicted[k]):
                continue
            if abs(b - a) < 1e-12:
                predicted[k] = d_tr[i]
            else:
                w = (stations[k] - a) / (b - a)
                predicted[k] = d_tr[i] + w * (d_tr[i + 1] - d_tr[i])
    return predicted


@dataclass
class ProcessorConfig:
    """Inflation and clustering knobs for obstacle ingestion."""

    margin_long: float = 0.5
    margin_lat: float = 0.3
    dbscan_eps: float = 1.5
    dbscan_min_pts: int = 2
    pedestrian_radius: float = 0.3
    sample_spacing: float = 0.25
    prediction_time: float = 10.0
    prediction_dt: float = 0.05
    includes_ego_halfwidth: bool = False

    def with_ego(self, ego_length: float, ego_width: float) -> "ProcessorConfig":
        """Fold the ego half-dimensions into the margins, exactly once."""
        if self.includes_ego_halfwidth:
            raise ValueError("ego half-width already folded into margins")
        return replace(
            self,
            margin_long=self.margin_long + 0.5 * ego_length,
            margin_lat=self.margin_lat + 0.5 * ego_width,
            includes_ego_halfwidth=True,
        )


def build_obstacle_set(obstacles, ref: ReferencePath, n: int, ds: float, s0: float,
                       cfg: ProcessorConfig | None = None) -> ObstacleSet:
    """Run the full ingestion pipeline over raw obstacles.

    Static vehicles are inflated individually, static pedestrians are
    clustered and hulled over their padded footprints, and dynamic obstacles
    carry a station-sampled prediction. Obstacles projecting outside the
    reference extent are skipped.
    """
    cfg = cfg or ProcessorConfig()
    ped_pad = cfg.pedestrian_radius + cfg.margin_lat
    polys: list[ObstaclePolygon] = []

    ped_indices = [i for i, o in enumerate(obstacles)
                   if o.kind == PEDESTRIAN and not o.is_dynamic]
    static_peds = [obstacles[i] for i in ped_indices]
    for idx, o in enumerate(obstacles):
        if o.is_dynamic:
            try:
                pred = predict_dynamic(
                    o, ref, n, ds, s0,
                    horizon_time=cfg.prediction_time, dt=cfg.prediction_dt,
                )
                if o.kind == VEHICLE:
                    poly = inflate_vehicle(
                        o, ref, cfg.margin_long, cfg.margin_lat, cfg.sample_spacing,
                        is_dynamic=True, predicted_d=pred,
                    )
                else:
                    s, d = cart_to_frenet_many(
                        _octagon(np.array([o.x, o.y]), ped_pad), ref
                    )
                    poly = convex_hull(
                        np.stack([s, d], axis=1), pad_radius=ped_pad,
                        sample_spacing=cfg.sample_spacing,
                        is_dynamic=True, predicted_d=pred,
                    )
            except OutOfDomain:
                continue
            poly.source = (idx,)
            polys.append(poly)
        elif o.kind == VEHICLE:
            try:
                poly = inflate_vehicle(
                    o, ref, cfg.margin_long, cfg.margin_lat, cfg.sample_spacing
                )
            except OutOfDomain:
                continue
            poly.source = (idx,)
            polys.append(poly)

    if static_peds:
        try:
            clusters, noise = cluster_pedestrians(
                static_peds, ref, eps=cfg.dbscan_eps, min_pts=cfg.dbscan_min_pts
            )
        except OutOfDomain:
            clusters, noise = [], []
        groups = clusters + [[i] for i in noise]
        for members in groups:
            pts = []
            for i in members:
                p = static_peds[i]
                pts.append(_octagon(np.array([p.x, p.y]), ped_pad))
            try:
                s, d = cart_to_frenet_many(np.concatenate(pts, axis=0), ref)
            except OutOfDomain:
                continue
            poly = convex_hull(
                np.stack([s, d], axis=1), pad_radius=ped_pad,
                sample_spacing=cfg.sample_spacing,
            )
            poly.source = tuple(sorted(ped_indices[i] for i in members))
            polys.append(poly)
    return ObstacleSet(polys)
