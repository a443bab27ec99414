import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tl2la.geometry import (
    AmbiguousMatch,
    NotLocated,
    distance_to_entry,
    is_lead,
    locate,
    points_in_polygon,
    project_onto_polyline,
)
from tl2la.model import Lane, RoadMap, Scene, TrafficLight, TurnType, VehicleTrack

from conftest import straight_lane


def _map(*lanes):
    return RoadMap(tuple(lanes), (TrafficLight("s", "X"),))


def _shifted(lane, dx, dy):
    move = lambda pts: tuple((x + dx, y + dy) for x, y in pts)
    return Lane(lane.id, move(lane.left_boundary), move(lane.right_boundary), lane.turn_type,
                lane.successor_ids, (lane.entry_point[0] + dx, lane.entry_point[1] + dy))


def test_centroid_is_located_on_its_lane(two_lane_map):
    a = two_lane_map.lanes_by_id["A"]
    assert locate(a.polygon.mean(axis=0), two_lane_map) == "A"


def test_far_point_is_unmatched(two_lane_map):
    assert locate((100.0, 100.0), two_lane_map) is None


def test_overlapping_lanes_are_ambiguous():
    road_map = _map(straight_lane("A", 0.0), straight_lane("B", 1.0))
    with pytest.raises(AmbiguousMatch):
        locate((2.0, 10.0), road_map)


def test_edge_points_count_as_inside():
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    pts = np.array([[0.0, 0.5], [1.0, 0.5], [0.5, 0.0], [0.0, 0.0], [1.0001, 0.5]])
    assert points_in_polygon(pts, square).tolist() == [True, True, True, True, False]


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-2, 25), st.floats(-5, 12))
def test_locate_is_translation_equivariant(dx, dy, px, py):
    lanes = (straight_lane("A", 0.0), straight_lane("B", 3.5))
    moved = tuple(_shifted(l, dx, dy) for l in lanes)
    assert locate((px, py), _map(*lanes)) == locate((px + dx, py + dy), _map(*moved))


@settings(max_examples=200, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10))
def test_square_containment_matches_box_test(x, y):
    square = np.array([[-5, -5], [5, -5], [5, 5], [-5, 5]], dtype=float)
    assert points_in_polygon(np.array([[x, y]]), square)[0] == (abs(x) <= 5 and abs(y) <= 5)


def test_projection_on_straight_polyline():
    line = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]])
    s = project_onto_polyline(np.array([[3.0, 2.0], [12.0, 4.0], [-1.0, 0.0]]), line)
    assert s == pytest.approx([3.0, 14.0, 0.0])


def test_distance_at_entry_is_zero():
    lane = straight_lane("A", 0.0)
    assert distance_to_entry(lane.entry_point, lane) == 0.0


def test_distance_from_far_end_of_straight_lane():
    lane = straight_lane("A", 0.0, length=20.0)
    assert distance_to_entry((1.75, 0.0), lane) == pytest.approx(20.0, abs=0.01)


def test_quarter_circle_arc_length():
    theta = np.linspace(0.0, math.pi / 2, 2001)
    arc = lambda r: tuple((r * math.cos(t), r * math.sin(t)) for t in theta)
    lane = Lane("C", arc(8.25), arc(11.75), TurnType.LEFT_TURN, (), (0.0, 10.0))
    assert distance_to_entry((10.0, 0.0), lane) == pytest.approx(5 * math.pi, abs=0.05)


def test_distance_decreases_towards_entry():
    lane = straight_lane("A", 0.0)
    d = [distance_to_entry((1.75, y), lane) for y in np.linspace(0, 20, 41)]
    assert all(b < a for a, b in zip(d, d[1:]))


def _scene(positions):
    tracks = [VehicleTrack("ego", [0.0], [[50.0, 50.0]], True)]
    tracks += [VehicleTrack(vid, [0.0], [p]) for vid, p in positions.items()]
    return Scene("s", 0.1, tuple(tracks))


def test_lead_vehicle():
    road_map = _map(straight_lane("A", 0.0), straight_lane("B", 3.5))
    scene = _scene({"front": (1.0, 18.0), "back": (1.0, 5.0), "other": (5.0, 2.0)})
    assert is_lead("front", 0.0, scene, road_map)
    assert not is_lead("back", 0.0, scene, road_map)
    assert is_lead("other", 0.0, scene, road_map)


def test_exact_tie_reports_both_as_lead():
    road_map = _map(straight_lane("A", 0.0))
    scene = _scene({"a": (1.0, 10.0), "b": (2.5, 10.0)})
    assert is_lead("a", 0.0, scene, road_map) and is_lead("b", 0.0, scene, road_map)


def test_unlocated_vehicle_raises():
    road_map = _map(straight_lane("A", 0.0))
    with pytest.raises(NotLocated):
        is_lead("ego", 0.0, _scene({}), road_map)
