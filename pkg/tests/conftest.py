import sys

import pytest

from tl2la.model import Lane, RoadMap, TrafficLight, TurnType
from tl2la.simulator import build_map, iter_scenes, preset
from tl2la.transform import build_lane_sequences, proximity_filter


def straight_lane(lane_id, x0, length=20.0, width=3.5, points=5, turn=TurnType.STRAIGHT, successors=()):
    """Lane heading towards +y that ends (enters the intersection) at y = length."""
    ys = [length * i / (points - 1) for i in range(points)]
    left = tuple((x0, y) for y in ys)
    right = tuple((x0 + width, y) for y in ys)
    return Lane(lane_id, left, right, turn, tuple(successors), (x0 + width / 2, length))


@pytest.fixture
def two_lane_map():
    lanes = (straight_lane("A", 0.0), straight_lane("B", 3.5, turn=TurnType.RIGHT_TURN))
    lights = (TrafficLight("s1", "X"), TrafficLight("s2", "X"))
    truth = {("s1", "A"): 1, ("s1", "B"): 0, ("s2", "A"): 0, ("s2", "B"): 1}
    return RoadMap(lanes, lights, truth)


def prepare(config):
    """Lane-sequence map and proximity-filtered scenes of a simulated corpus."""
    sequences = build_lane_sequences(build_map(config))
    return sequences, [proximity_filter(s, sequences) for s in iter_scenes(config)]


@pytest.fixture(scope="session")
def basic_config():
    return preset("Basic4Way").with_(seed=11, scene_count=40)


@pytest.fixture(scope="session")
def basic_raw(basic_config):
    return build_map(basic_config), list(iter_scenes(basic_config))


@pytest.fixture(scope="session")
def basic_prepared(basic_config):
    return prepare(basic_config)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, text = results[number]
        terminalreporter.write_line(f"{status} criterion {number}: {text}")
