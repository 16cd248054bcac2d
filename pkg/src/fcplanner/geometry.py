"""Planar convex-polygon helpers shared by obstacle processing and metrics."""

import numpy as np


def rect_corners(cx, cy, yaw, length, width):
    """Corners of an oriented rectangle, counterclockwise."""
    c, s = np.cos(yaw), np.sin(yaw)
    hl, hw = 0.5 * length, 0.5 * width
    local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array([cx, cy], dtype=float)


def signed_area(poly):
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_points(points):
    """Monotone-chain convex hull, counterclockwise, minimal vertex set.

    Collinear inputs collapse to their two extreme points, coincident
    inputs to a single point.
    """
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) <= 2:
        return pts

    def build(seq):
        out = []
        for p in seq:
            while len(out) > 1 and _cross(out[-2], out[-1], p) <= 0.0:
                out.pop()
            out.append(p)
        return out

    lower = build(pts)
    upper = build(pts[::-1])
    return np.asarray(lower[:-1] + upper[:-1])


def sample_edges(poly, spacing):
    """Boundary points of a closed polygon at steps <= spacing, vertices included."""
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    poly = np.asarray(poly, dtype=float)
    if len(poly) == 1:
        return poly.copy()
    if len(poly) == 2:
        a, b = poly
        n = max(1, int(np.ceil(np.hypot(*(b - a)) / spacing)))
        t = np.linspace(0.0, 1.0, n + 1)
        return a + t[:, None] * (b - a)
    out = []
    for a, b in zip(poly, np.roll(poly, -1, axis=0)):
        n = max(1, int(np.ceil(np.hypot(*(b - a)) / spacing)))
        t = np.arange(n) / n
        out.append(a + t[:, None] * (b - a))
    return np.concatenate(out, axis=0)


def point_in_convex(poly, p, tol=1e-9):
    """Inside-or-on test for a counterclockwise convex polygon."""
    a = poly
    b = np.roll(poly, -1, axis=0)
    cr = (b[:, 0] - a[:, 0]) * (p[1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (p[0] - a[:, 0])
    return bool(np.all(cr >= -tol))


def polygons_intersect(pa, pb):
    """Separating-axis overlap test for convex polygons."""
    for poly in (pa, pb):
        edges = np.roll(poly, -1, axis=0) - poly
        for ex, ey in edges:
            nx, ny = -ey, ex
            if nx * nx + ny * ny < 1e-18:
                continue
            proj_a = pa[:, 0] * nx + pa[:, 1] * ny
            proj_b = pb[:, 0] * nx + pb[:, 1] * ny
            if proj_a.max() < proj_b.min() or proj_b.max() < proj_a.min():
                return False
    return True


def _points_to_edges(pts, poly):
    a = poly
    ab = np.roll(poly, -1, axis=0) - a
    den = np.maximum((ab * ab).sum(axis=1), 1e-12)
    rel = pts[:, None, :] - a[None, :, :]
    t = np.clip((rel * ab[None]).sum(axis=2) / den[None], 0.0, 1.0)
    proj = a[None] + t[..., None] * ab[None]
    diff = pts[:, None, :] - proj
    return float(np.sqrt((diff * diff).sum(axis=2)).min())


def polygon_distance(pa, pb):
    """Euclidean gap between convex polygons, zero when touching or overlapping."""
    if polygons_intersect(pa, pb):
        return 0.0
    return min(_points_to_edges(pa, pb), _points_to_edges(pb, pa))
