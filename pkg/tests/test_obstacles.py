"""Obstacle footprints, clustering, and dynamic prediction."""

import numpy as np
import pytest

from fcplanner import (
    ProcessorConfig,
    RawObstacle,
    build_obstacle_set,
    build_reference,
    cluster_pedestrians,
    convex_hull,
    inflate_vehicle,
    predict_dynamic,
)
from fcplanner.geometry import (
    convex_hull_points,
    point_in_convex,
    polygon_distance,
    polygons_intersect,
    rect_corners,
)


@pytest.fixture
def ref():
    return build_reference([[0.0, 0.0], [150.0, 0.0]])


def test_rect_corners_axis_aligned():
    c = rect_corners(10.0, 2.0, 0.0, 4.0, 2.0)
    assert sorted(map(tuple, np.round(c, 9))) == [
        (8.0, 1.0), (8.0, 3.0), (12.0, 1.0), (12.0, 3.0)]


def test_rect_corners_rotation_preserves_extent():
    c = rect_corners(0.0, 0.0, np.pi / 6, 4.0, 2.0)
    lens = np.hypot(*(c - c.mean(axis=0)).T)
    np.testing.assert_allclose(lens, np.hypot(2.0, 1.0), atol=1e-9)


def test_convex_hull_points_known_square():
    pts = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5], [0.2, 0.8]], float)
    hull = convex_hull_points(pts)
    assert len(hull) == 4
    assert point_in_convex(hull, np.array([0.5, 0.5]))
    assert not point_in_convex(hull, np.array([1.5, 0.5]))


def test_polygon_distance_and_intersection():
    a = rect_corners(0.0, 0.0, 0.0, 2.0, 2.0)
    b = rect_corners(4.0, 0.0, 0.0, 2.0, 2.0)
    assert polygon_distance(a, b) == pytest.approx(2.0)
    assert not polygons_intersect(a, b)
    c = rect_corners(1.5, 0.0, 0.0, 2.0, 2.0)
    assert polygons_intersect(a, c)
    assert polygon_distance(a, c) == 0.0


def test_vehicle_inflation_margins(ref):
    o = RawObstacle(kind="vehicle", x=50.0, y=-1.0, yaw=0.0, length=4.0, width=2.0)
    poly = inflate_vehicle(o, ref, margin_long=0.5, margin_lat=0.3)
    assert poly.min_s == pytest.approx(50.0 - 2.5, abs=1e-6)
    assert poly.max_s == pytest.approx(50.0 + 2.5, abs=1e-6)
    assert poly.min_d == pytest.approx(-1.0 - 1.3, abs=1e-6)
    assert poly.max_d == pytest.approx(-1.0 + 1.3, abs=1e-6)
    # boundary sampling is dense enough for cell assignment downstream
    gaps = np.hypot(*np.diff(np.vstack([poly.edge_samples,
                                        poly.edge_samples[:1]]), axis=0).T)
    assert gaps.max() <= 0.25 + 1e-9


def test_pedestrian_cluster_merges_neighbors(ref):
    peds = [
        RawObstacle(kind="pedestrian", x=40.0, y=1.0),
        RawObstacle(kind="pedestrian", x=41.0, y=1.4),
        RawObstacle(kind="pedestrian", x=41.8, y=0.8),
        RawObstacle(kind="pedestrian", x=90.0, y=-2.0),
    ]
    clusters, noise = cluster_pedestrians(peds, ref, eps=1.5, min_pts=2)
    assert sorted(len(m) for m in clusters) == [3]
    assert sorted(sorted(c) for c in clusters) == [[0, 1, 2]]
    assert noise == [3]


def test_cluster_hull_covers_members_with_padding(ref):
    peds = [
        RawObstacle(kind="pedestrian", x=40.0, y=1.0),
        RawObstacle(kind="pedestrian", x=41.0, y=1.4),
    ]
    pts = np.array([[p.x, p.y] for p in peds])
    poly = convex_hull(pts, pad_radius=0.3, sample_spacing=0.25)
    # polygonal padding reaches the full radius along vertex normals and at
    # least cos(pi/8) of it elsewhere
    pad = 0.3 * np.cos(np.pi / 8) - 1e-6
    assert poly.min_s <= 40.0 - pad
    assert poly.max_s >= 41.0 + pad
    assert poly.min_d <= 1.0 - pad
    assert poly.max_d >= 1.4 + pad


def test_build_obstacle_set_provenance_and_kinds(ref):
    raws = [
        RawObstacle(kind="vehicle", x=30.0, y=-1.0, yaw=0.0, length=4.0, width=2.0),
        RawObstacle(kind="pedestrian", x=60.0, y=1.0),
        RawObstacle(kind="pedestrian", x=60.8, y=1.3),
        RawObstacle(kind="vehicle", x=100.0, y=2.0, yaw=np.pi, length=4.0,
                    width=2.0, vx=-5.0, dynamic=True),
    ]
    obs = build_obstacle_set(raws, ref, n=61, ds=1.0, s0=0.0)
    sources = sorted(p.source for p in obs.polygons)
    assert sources == [(0,), (1, 2), (3,)]
    dyn = [p for p in obs.polygons if p.is_dynamic]
    assert len(dyn) == 1 and dyn[0].predicted_d is not None


def test_predict_dynamic_row_shape_and_direction(ref):
    o = RawObstacle(kind="vehicle", x=100.0, y=2.0, yaw=np.pi, length=4.0,
                    width=2.0, vx=-8.0, dynamic=True)
    row = predict_dynamic(o, ref, n=61, ds=1.0, s0=0.0)
    assert row.shape == (61,)
    valid = ~np.isnan(row)
    assert valid.any()
    np.testing.assert_allclose(row[valid], 2.0, atol=1e-6)
    # an obstacle leaving the horizon produces no valid stations
    away = RawObstacle(kind="vehicle", x=145.0, y=2.0, yaw=0.0, length=4.0,
                       width=2.0, vx=8.0, dynamic=True)
    row2 = predict_dynamic(away, ref, n=61, ds=1.0, s0=0.0)
    assert np.isnan(row2[: 40]).all()


def test_with_ego_folds_half_dims_once():
    cfg = ProcessorConfig()
    folded = cfg.with_ego(4.5, 2.0)
    assert folded.margin_long == pytest.approx(cfg.margin_long + 2.25)
    assert folded.margin_lat == pytest.approx(cfg.margin_lat + 1.0)
    assert folded.includes_ego_halfwidth
    with pytest.raises(ValueError):
        folded.with_ego(4.5, 2.0)
