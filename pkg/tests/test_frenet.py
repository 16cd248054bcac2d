"""Reference-path construction and coordinate transforms."""

import numpy as np
import pytest

from fcplanner import (
    DegenerateReference,
    OutOfDomain,
    build_reference,
    cart_to_frenet,
    cart_to_frenet_many,
    frenet_to_cart,
    frenet_to_cart_many,
)


def test_resample_spacing_is_honored():
    ref = build_reference([[0.0, 0.0], [10.0, 0.0]], resample_spacing=0.5)
    gaps = np.diff(ref.cum_arclength)
    assert np.all(gaps <= 0.5 + 1e-9)
    assert ref.length == pytest.approx(10.0, abs=1e-9)


def test_rejects_degenerate_input():
    with pytest.raises(DegenerateReference):
        build_reference([[1.0, 1.0]])
    with pytest.raises(DegenerateReference):
        build_reference([[0.0, 0.0], [0.0, 0.0]])


def test_straight_line_roundtrip_exact(straight_ref):
    rng = np.random.default_rng(11)
    s = rng.uniform(5.0, 195.0, 200)
    d = rng.uniform(-5.0, 5.0, 200)
    xy = frenet_to_cart_many(s, d, straight_ref)
    np.testing.assert_allclose(xy[:, 0], s, atol=1e-9)
    np.testing.assert_allclose(xy[:, 1], d, atol=1e-9)
    s2, d2 = cart_to_frenet_many(xy, straight_ref)
    np.testing.assert_allclose(s2, s, atol=1e-9)
    np.testing.assert_allclose(d2, d, atol=1e-9)


def test_curved_roundtrip_tolerance(circle_ref, sine_ref):
    rng = np.random.default_rng(7)
    for ref in (circle_ref, sine_ref):
        n = 500
        s = rng.uniform(2.0, ref.length - 2.0, n)
        d = rng.uniform(-3.0, 3.0, n)
        xy = frenet_to_cart_many(s, d, ref)
        s2, d2 = cart_to_frenet_many(xy, ref)
        back = frenet_to_cart_many(s2, d2, ref)
        err = np.hypot(back[:, 0] - xy[:, 0], back[:, 1] - xy[:, 1])
        assert err.max() < 1e-6


def test_left_of_path_is_positive_d(circle_ref):
    # circle runs counter-clockwise, so the interior is on the left
    p = circle_ref.position(10.0)
    inward = -p / np.linalg.norm(p) * 2.0
    fp = cart_to_frenet(p + inward, circle_ref)
    assert fp.d > 0


def test_projection_rejects_points_outside_span(straight_ref):
    with pytest.raises(OutOfDomain):
        cart_to_frenet(np.array([-30.0, 0.0]), straight_ref)
    with pytest.raises(OutOfDomain):
        cart_to_frenet(np.array([260.0, 1.0]), straight_ref)


def test_project_clipped_keeps_out_of_span_points(straight_ref):
    pts = np.array([[-30.0, 1.0], [50.0, -2.0], [260.0, 0.5]])
    s, d, inside = straight_ref.project_clipped(pts)
    assert inside.tolist() == [False, True, False]
    assert s[0] == pytest.approx(0.0)
    assert s[2] == pytest.approx(straight_ref.length)
    assert d[1] == pytest.approx(-2.0, abs=1e-9)


def test_heading_and_position_consistent(sine_ref):
    s = np.linspace(1.0, sine_ref.length - 1.0, 50)
    for si in s:
        h = sine_ref.heading_at(si)
        step = sine_ref.position(si + 0.05) - sine_ref.position(si - 0.05)
        np.testing.assert_allclose(np.arctan2(step[1], step[0]), h, atol=5e-3)


def test_heading_delta_matches_heading_at(circle_ref):
    hd = circle_ref.heading_delta(10.0, 1.0, 5)
    for k in range(5):
        expect = circle_ref.heading_at(10.0 + (k + 1) * 1.0) - circle_ref.heading_at(10.0 + k * 1.0)
        assert hd[k] == pytest.approx(expect, abs=1e-9)


def test_reversing_reference_rejected():
    # a hairpin survives resampling as a >= pi/2 heading jump
    with pytest.raises(DegenerateReference):
        build_reference([[0.0, 0.0], [10.0, 0.0], [0.0, 0.5]])
