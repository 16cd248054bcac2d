"""Deviation-side assignment rules."""

import numpy as np
import pytest

from fcplanner import Blocked, DecisionGovernor, classify_obstacle
from fcplanner.decision import Label
from fcplanner.obstacles import RawObstacle, build_obstacle_set
from fcplanner import build_reference


def _poly(y, width=2.0, x=50.0, length=4.0):
    ref = build_reference([[0.0, 0.0], [150.0, 0.0]])
    raw = RawObstacle(kind="vehicle", x=x, y=y, yaw=0.0, length=length, width=width)
    obs = build_obstacle_set([raw], ref, n=61, ds=1.0, s0=0.0)
    return obs.polygons[0]


ROAD = (-4.0, 4.0)


def test_only_upper_gap_passable_forces_lower_label():
    # obstacle hugging the lower road edge: ego must pass above it
    poly = _poly(y=-3.0)
    dec = classify_obstacle(poly, *ROAD, ego_width=2.0, clearance=0.25)
    assert dec.label is Label.LOWER
    assert dec.upper_gap > dec.lower_gap


def test_only_lower_gap_passable_forces_upper_label():
    poly = _poly(y=3.0)
    dec = classify_obstacle(poly, *ROAD, ego_width=2.0, clearance=0.25)
    assert dec.label is Label.UPPER


def test_no_passable_gap_raises_blocked():
    poly = _poly(y=0.0, width=4.5)
    with pytest.raises(Blocked):
        classify_obstacle(poly, *ROAD, ego_width=2.0, clearance=0.25)


def test_both_passable_prefers_wider_gap():
    poly = _poly(y=-1.0)   # upper gap wider
    dec = classify_obstacle(poly, -5.5, 5.5, ego_width=2.0, clearance=0.25)
    assert dec.label is Label.LOWER
    poly = _poly(y=1.0)
    dec = classify_obstacle(poly, -5.5, 5.5, ego_width=2.0, clearance=0.25)
    assert dec.label is Label.UPPER


def test_risk_mode_defers_two_sided_cases():
    poly = _poly(y=0.0, width=1.0)
    dec = classify_obstacle(poly, -6.0, 6.0, ego_width=2.0, clearance=0.25,
                            risk_mode=True)
    assert dec.label is Label.RISK
    # one-sided cases stay forced even in risk mode
    dec = classify_obstacle(_poly(y=-3.0), *ROAD, ego_width=2.0,
                            clearance=0.25, risk_mode=True)
    assert dec.label is Label.LOWER


def test_hysteresis_keeps_incumbent_side():
    gov = DecisionGovernor(-5.5, 5.5, ego_width=2.0, clearance=0.25,
                           hysteresis=0.3)
    first = gov.classify("car", _poly(y=-0.2))
    assert first.label is Label.LOWER
    # nudged so the other gap is now slightly wider, within hysteresis
    second = gov.classify("car", _poly(y=0.1))
    assert second.label is Label.LOWER
    # a decisive move beyond the margin flips the side
    third = gov.classify("car", _poly(y=1.5))
    assert third.label is Label.UPPER


def test_partition_splits_by_label():
    gov = DecisionGovernor(-5.5, 5.5, ego_width=2.0, clearance=0.25)
    polys = [_poly(y=-1.5), _poly(y=1.5)]
    lb_set, ub_set, risk_set = gov.partition(polys, keys=["a", "b"])
    assert [len(lb_set), len(ub_set), len(risk_set)] == [1, 1, 0]


def test_memory_is_per_key():
    gov = DecisionGovernor(-5.5, 5.5, ego_width=2.0, clearance=0.25)
    gov.classify("a", _poly(y=-0.2))
    dec_b = gov.classify("b", _poly(y=0.2))
    # key "b" had no incumbent, so it gets the fresh preference
    assert dec_b.label is Label.UPPER
