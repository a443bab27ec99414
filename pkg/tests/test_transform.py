import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tl2la.geometry import AmbiguousMatch, distance_to_entry, locate
from tl2la.model import LightObservation, RoadMap, Scene, TrafficLight, TrafficLightState, TurnType, VehicleTrack
from tl2la.simulator import build_map, iter_scenes, preset
from tl2la.stats import DomainError
from tl2la.transform import (
    OverlapError,
    SplitTrajectory,
    TopologyError,
    build_lane_sequences,
    co_observed_pairs,
    corpus_stats,
    entry_lanes,
    merge_trajectory_splits,
    proximity_filter,
)

from conftest import straight_lane
from oracles import brute_force_pairs

RED = TrafficLightState.RED


def _split(n_past, n_future, gap=0.0):
    past_t = 0.1 * np.arange(n_past)
    fut_t = 0.1 * (n_past + np.arange(n_future)) - gap
    return SplitTrajectory("v", past_t, np.zeros((n_past, 2)), fut_t, np.ones((n_future, 2)))


def test_merge_past_and_future():
    track = merge_trajectory_splits(_split(11, 50))
    assert len(track) == 61
    assert np.all(np.diff(track.timestamps) > 0)
    assert np.array_equal(track.positions[11], [1.0, 1.0])


def test_merge_with_empty_future():
    split = _split(11, 0)
    track = merge_trajectory_splits(split)
    assert np.array_equal(track.timestamps, split.past_timestamps)
    assert np.array_equal(track.positions, split.past_positions)


def test_merge_overlap_raises():
    with pytest.raises(OverlapError):
        merge_trajectory_splits(_split(11, 5, gap=0.1))


def _chain(length=10.0, count=3):
    """Segments c0 (at the entry) back to c{count-1}, each ``length`` metres, heading +y."""
    lanes = []
    for i in range(count):
        top = length * (count - i)
        base = straight_lane(f"c{i}", 0.0, length=length, points=3,
                             successors=() if i == 0 else (f"c{i - 1}",))
        shift = top - length
        move = lambda pts: tuple((x, y + shift) for x, y in pts)
        lanes.append(type(base)(base.id, move(base.left_boundary), move(base.right_boundary), base.turn_type,
                                base.successor_ids, (base.entry_point[0], base.entry_point[1] + shift)))
    return RoadMap(tuple(lanes), (TrafficLight("s", "X"),), {("s", "c0"): 1, ("s", "c2"): 0})


def test_three_segment_chain_becomes_two_segment_sequence():
    seq = build_lane_sequences(_chain())
    (lane,) = seq.lanes
    ys = [p[1] for p in lane.left_boundary]
    assert lane.id == "c0" and min(ys) == 10.0 and max(ys) == 30.0
    assert len(lane.left_boundary) == 5  # the shared junction point appears once
    assert seq.ground_truth == {("s", "c0"): 1}


def test_single_long_lane_is_unchanged():
    lane = straight_lane("L", 0.0, length=30.0)
    road_map = RoadMap((lane,), ())
    assert build_lane_sequences(road_map).lanes == (lane,)


def test_self_loop_raises():
    lane = straight_lane("L", 0.0, successors=("L",))
    with pytest.raises(TopologyError):
        build_lane_sequences(RoadMap((lane,), ()))


def test_fork_ends_the_sequence():
    entry = straight_lane("e", 0.0, length=10.0)
    a = straight_lane("a", -4.0, length=10.0, successors=("e",))
    b = straight_lane("b", 4.0, length=10.0, successors=("e",))
    (lane,) = build_lane_sequences(RoadMap((entry, a, b), ())).lanes
    assert lane == entry


def test_shared_upstream_segment_is_left_out():
    shared = straight_lane("p", 0.0, length=10.0, successors=("e1", "e2"))
    e1 = straight_lane("e1", 0.0, length=5.0)
    e2 = straight_lane("e2", 3.5, length=5.0)
    seq = build_lane_sequences(RoadMap((shared, e1, e2), ()))
    assert {l.id for l in seq.lanes} == {"e1", "e2"}
    assert seq.lanes_by_id["e1"] == e1


def test_entry_lanes_of_generated_map():
    road_map = build_map(preset("Basic4Way"))
    assert sorted(l.id for l in entry_lanes(road_map)) == sorted(f"{b}{i}" for b in "NESW" for i in (0, 1))


def test_sequences_cover_the_preparation_depth():
    seq = build_lane_sequences(build_map(preset("Basic4Way")))
    assert len(seq.lanes) == 8
    for lane in seq.lanes:
        far = lane.centerline[0]
        assert distance_to_entry(far, lane) == pytest.approx(30.0)


def _scene(tracks, observations):
    ego = VehicleTrack("ego", [0.0, 0.1, 0.2, 0.3], np.full((4, 2), 500.0), True)
    return Scene("t", 0.1, (ego, *tracks), tuple(observations))


def test_single_shared_timestamp_gives_one_pair(two_lane_map):
    track = VehicleTrack("v", [0.1, 0.2], [[1.0, 5.0], [1.0, 6.0]])
    scene = _scene([track], [LightObservation("s1", 0.2, RED)])
    assert co_observed_pairs([scene], two_lane_map) == {("s1", "A")}


def test_lane_traffic_while_light_unobserved_is_excluded(two_lane_map):
    track = VehicleTrack("v", [0.1, 0.2], [[1.0, 5.0], [1.0, 6.0]])
    scene = _scene([track], [LightObservation("s1", 0.0, RED), LightObservation("s1", 0.3, RED)])
    assert co_observed_pairs([scene], two_lane_map) == set()


def test_co_observed_matches_brute_force(basic_raw):
    road_map, scenes = basic_raw
    seq = build_lane_sequences(road_map)
    pairs = co_observed_pairs(scenes, seq)
    assert pairs and pairs == brute_force_pairs(scenes, seq)


def test_co_observed_is_monotone(basic_prepared):
    road_map, scenes = basic_prepared
    previous = set()
    for n in (1, 5, 10, 20, 40):
        current = co_observed_pairs(scenes[:n], road_map)
        assert previous <= current
        previous = current


def _lane_track(ys):
    ys = np.asarray(ys, dtype=float)
    return VehicleTrack("v", 0.1 * np.arange(len(ys)), np.column_stack([np.full(len(ys), 1.75), ys]))


def _filter(ys, length=60.0):
    road_map = RoadMap((straight_lane("A", 0.0, length=length),), (TrafficLight("s", "X"),))
    return proximity_filter(_scene([_lane_track(ys)], []), road_map), road_map


def test_proximity_removes_distant_vehicle():
    scene, _ = _filter([10.0, 10.5, 11.0])
    assert [t.vehicle_id for t in scene.tracks] == ["ego"]


def test_proximity_keeps_close_vehicle():
    scene, _ = _filter([55.0, 55.1, 55.2])
    assert len(scene.tracks[1]) == 3


def test_proximity_truncates_at_the_boundary():
    ys = np.linspace(20.0, 59.0, 40)
    scene, road_map = _filter(ys)
    lane = road_map.lanes[0]
    expected = [y for y in ys if distance_to_entry((1.75, y), lane) <= 20.0]
    assert scene.tracks[1].positions[:, 1].tolist() == expected


def test_proximity_drops_unlocated_samples():
    scene, _ = _filter([55.0, 70.0, 55.2])
    assert scene.tracks[1].positions[:, 1].tolist() == [55.0, 55.2]


def test_proximity_is_idempotent(basic_raw):
    road_map, scenes = basic_raw
    seq = build_lane_sequences(road_map)
    for scene in scenes[:10]:
        once = proximity_filter(scene, seq)
        assert proximity_filter(once, seq) == once
        assert once.ego == scene.ego


def test_raw_segments_touch_at_junctions():
    road_map = build_map(preset("Basic4Way"))
    n0 = road_map.lanes_by_id["N0/1"]
    with pytest.raises(AmbiguousMatch):
        locate(n0.centerline[-1], road_map)


def test_no_ambiguous_matches_after_preparation():
    for name in ("Basic4Way", "ProtectedLeft", "RightTurnOnRed"):
        cfg = preset(name).with_(scene_count=5, ego_driver=True)
        seq = build_lane_sequences(build_map(cfg))
        for scene in iter_scenes(cfg):
            for track in scene.tracks:
                for p in track.positions:
                    locate(p, seq)  # raises AmbiguousMatch on overlap


def test_three_branch_geometry_has_no_overlaps():
    cfg = preset("Basic4Way").with_(branch_count=3, signal_plan={
        f"B{i}-main": preset("Basic4Way").signal_plan["N-main"] for i in range(3)}, scene_count=3)
    seq = build_lane_sequences(build_map(cfg))
    for scene in iter_scenes(cfg):
        for track in scene.tracks:
            seq.geometry.locate_many(track.positions)


def test_corpus_stats_reference_rows():
    lyft = corpus_stats(162_000, 25.0, 10.0)
    assert lyft.density == 405_000 and lyft.total_time == 1125
    assert round(corpus_stats(250_000, 11.0, 2110.0).density) == 1303
    assert corpus_stats(1, 1.0, 1.0).density == 1


@pytest.mark.parametrize("args", [(0, 25.0, 10.0), (10, -1.0, 10.0), (10, 25.0, 0.0)])
def test_corpus_stats_domain(args):
    with pytest.raises(DomainError):
        corpus_stats(*args)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10 ** 6), st.floats(0.1, 100), st.floats(0.01, 1e4))
def test_density_definition(n, tau, r):
    assert corpus_stats(n, tau, r).density == pytest.approx(n * tau / r, rel=1e-12)
