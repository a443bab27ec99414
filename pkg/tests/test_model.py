from dataclasses import replace

import numpy as np
import pytest

from tl2la.model import LightObservation, RoadMap, Scene, TrafficLightState, VehicleTrack, validate_map, validate_scene

RED = TrafficLightState.RED


def _scene(tracks, observations=()):
    return Scene("s", 0.1, tuple(tracks), tuple(observations))


def _track(vid, n=5, ego=False, t0=0.0):
    ts = t0 + 0.1 * np.arange(n)
    return VehicleTrack(vid, ts, np.column_stack([np.ones(n), ts]), ego)


def test_well_formed_map_has_no_violations(two_lane_map):
    assert validate_map(two_lane_map) == []


def test_unequal_boundary_counts_name_the_lane(two_lane_map):
    lane = two_lane_map.lanes[0]
    bad = replace(lane, left_boundary=lane.left_boundary[:3], right_boundary=lane.right_boundary[:4])
    problems = validate_map(replace(two_lane_map, lanes=(bad, two_lane_map.lanes[1])))
    assert len(problems) == 1
    assert "lane A" in problems[0]


def test_unknown_ground_truth_lane_names_the_pair(two_lane_map):
    truth = dict(two_lane_map.ground_truth)
    truth[("s1", "Z")] = 1
    problems = validate_map(replace(two_lane_map, ground_truth=truth))
    assert len(problems) == 1
    assert "(s1, Z)" in problems[0]


def test_misplaced_entry_point_and_bad_label(two_lane_map):
    lane = replace(two_lane_map.lanes[0], entry_point=(1.0, 5.0))
    truth = {**two_lane_map.ground_truth, ("s1", "A"): 2}
    problems = validate_map(RoadMap((lane, two_lane_map.lanes[1]), two_lane_map.lights, truth))
    assert len(problems) == 2


def test_unknown_successor_and_duplicate_ids(two_lane_map):
    a, b = two_lane_map.lanes
    problems = validate_map(replace(two_lane_map, lanes=(replace(a, successor_ids=("nowhere",)), b, b)))
    assert any("unknown successor nowhere" in p for p in problems)
    assert any("duplicate id" in p for p in problems)


def test_valid_scene(two_lane_map):
    scene = _scene([_track("ego", ego=True), _track("v")], [LightObservation("s1", 0.2, RED)])
    assert validate_scene(scene, two_lane_map) == []


def test_two_ego_tracks_is_one_violation(two_lane_map):
    scene = _scene([_track("e1", ego=True), _track("e2", ego=True)])
    assert len(validate_scene(scene, two_lane_map)) == 1


def test_unknown_light_is_one_violation(two_lane_map):
    scene = _scene([_track("ego", ego=True)], [LightObservation("nope", 0.1, RED)])
    problems = validate_scene(scene, two_lane_map)
    assert len(problems) == 1 and "nope" in problems[0]


def test_irregular_sampling_and_out_of_range_observation(two_lane_map):
    ts = np.array([0.0, 0.1, 0.25, 0.35])
    odd = VehicleTrack("v", ts, np.zeros((4, 2)))
    scene = _scene([_track("ego", ego=True), odd], [LightObservation("s1", 9.0, RED)])
    problems = validate_scene(scene, two_lane_map)
    assert len(problems) == 2


def test_duplicate_observation(two_lane_map):
    obs = [LightObservation("s1", 0.1, RED), LightObservation("s1", 0.1, RED)]
    assert len(validate_scene(_scene([_track("ego", ego=True)], obs), two_lane_map)) == 1


def test_validation_is_pure(two_lane_map):
    scene = _scene([_track("e1", ego=True), _track("e2", ego=True)])
    assert validate_scene(scene, two_lane_map) == validate_scene(scene, two_lane_map)
    assert validate_map(two_lane_map) == validate_map(two_lane_map)


def test_track_arrays_are_read_only():
    track = _track("v")
    with pytest.raises(ValueError):
        track.positions[0, 0] = 5.0


def test_track_length_mismatch():
    with pytest.raises(ValueError):
        VehicleTrack("v", [0.0, 0.1], [[0.0, 0.0]])


def test_state_alphabet():
    assert {s.value for s in TrafficLightState} == {"red", "green"}
