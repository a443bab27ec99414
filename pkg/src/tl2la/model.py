"""Domain types shared by every stage of the pipeline.

All types are immutable after construction. Track samples are stored as
read-only numpy arrays so that large corpora stay compact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Mapping, Optional

import numpy as np

Point = tuple[float, float]
PairKey = tuple[str, str]  # (light_id, lane_id)

SAMPLE_PERIOD_TOLERANCE = 1e-6
ENTRY_POINT_TOLERANCE = 1.0


class TrafficLightState(Enum):
    RED = "red"
    GREEN = "green"


class TurnType(Enum):
    LEFT_TURN = "left_turn"
    RIGHT_TURN = "right_turn"
    STRAIGHT = "straight"


@dataclass(frozen=True)
class Lane:
    id: str
    left_boundary: tuple[Point, ...]
    right_boundary: tuple[Point, ...]
    turn_type: TurnType
    successor_ids: tuple[str, ...] = ()
    entry_point: Point = (0.0, 0.0)

    @cached_property
    def polygon(self) -> np.ndarray:
        """Closed boundary loop: left boundary followed by the reversed right one."""
        return np.array(self.left_boundary + self.right_boundary[::-1], dtype=float)

    @cached_property
    def centerline(self) -> np.ndarray:
        left = np.asarray(self.left_boundary, dtype=float)
        right = np.asarray(self.right_boundary, dtype=float)
        return (left + right) / 2.0


@dataclass(frozen=True)
class TrafficLight:
    id: str
    intersection_id: str


@dataclass(frozen=True)
class RoadMap:
    lanes: tuple[Lane, ...]
    lights: tuple[TrafficLight, ...]
    ground_truth: Optional[Mapping[PairKey, int]] = None

    @cached_property
    def lanes_by_id(self) -> dict[str, Lane]:
        return {lane.id: lane for lane in self.lanes}

    @cached_property
    def light_ids(self) -> frozenset[str]:
        return frozenset(light.id for light in self.lights)

    @cached_property
    def geometry(self):
        """Vectorized lane lookup structures, built on first use."""
        from .geometry import LaneIndex

        return LaneIndex(self)

    def __getstate__(self):
        # cached_property values live in __dict__; only ship the fields.
        return {k: self.__dict__[k] for k in ("lanes", "lights", "ground_truth")}

    def __setstate__(self, state):
        self.__dict__.update(state)


def _frozen_array(values, shape_tail: tuple[int, ...] = ()) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape((-1,) + shape_tail)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class VehicleTrack:
    """Positions of one vehicle sampled on the scene clock.

    ``timestamps`` has shape (T,), ``positions`` has shape (T, 2).
    """

    vehicle_id: str
    timestamps: np.ndarray
    positions: np.ndarray
    is_ego: bool = False

    def __post_init__(self):
        object.__setattr__(self, "timestamps", _frozen_array(self.timestamps))
        object.__setattr__(self, "positions", _frozen_array(self.positions, (2,)))
        if len(self.timestamps) != len(self.positions):
            raise ValueError(
                f"track {self.vehicle_id}: {len(self.timestamps)} timestamps "
                f"but {len(self.positions)} positions"
            )

    def __len__(self) -> int:
        return len(self.timestamps)

    def __eq__(self, other):
        if not isinstance(other, VehicleTrack):
            return NotImplemented
        return (
            self.vehicle_id == other.vehicle_id
            and self.is_ego == other.is_ego
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.positions, other.positions)
        )

    __hash__ = None


@dataclass(frozen=True, slots=True)
class LightObservation:
    light_id: str
    timestamp: float
    state: TrafficLightState


@dataclass(frozen=True)
class Scene:
    scene_id: str
    sample_period: float
    tracks: tuple[VehicleTrack, ...]
    light_observations: tuple[LightObservation, ...] = field(default=())

    @property
    def ego(self) -> Optional[VehicleTrack]:
        return next((t for t in self.tracks if t.is_ego), None)

    def frame_of(self, timestamp: float) -> int:
        """Index of a timestamp on the scene's sampling grid."""
        return int(round(timestamp / self.sample_period))


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0.0 else min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.hypot(*(p - (a + t * ab))))


def validate_map(road_map: RoadMap) -> list[str]:
    """Return human-readable invariant violations; empty when the map is sound."""
    problems: list[str] = []
    lane_ids: set[str] = set()
    for lane in road_map.lanes:
        if lane.id in lane_ids:
            problems.append(f"lane {lane.id}: duplicate id")
        lane_ids.add(lane.id)
    light_ids: set[str] = set()
    for light in road_map.lights:
        if light.id in light_ids:
            problems.append(f"light {light.id}: duplicate id")
        light_ids.add(light.id)

    for lane in road_map.lanes:
        nl, nr = len(lane.left_boundary), len(lane.right_boundary)
        if nl != nr:
            problems.append(f"lane {lane.id}: left boundary has {nl} points, right has {nr}")
        elif nl < 2:
            problems.append(f"lane {lane.id}: boundaries need at least 2 points, got {nl}")
        else:
            gap = _segment_distance(
                np.asarray(lane.entry_point, dtype=float),
                np.asarray(lane.left_boundary[-1], dtype=float),
                np.asarray(lane.right_boundary[-1], dtype=float),
            )
            if gap > ENTRY_POINT_TOLERANCE:
                problems.append(
                    f"lane {lane.id}: entry point is {gap:.3f} m from the lane end"
                )
        for succ in lane.successor_ids:
            if succ not in lane_ids:
                problems.append(f"lane {lane.id}: unknown successor {succ}")

    for (light_id, lane_id), value in (road_map.ground_truth or {}).items():
        if light_id not in light_ids or lane_id not in lane_ids:
            problems.append(f"ground truth ({light_id}, {lane_id}): unknown id")
        if value not in (0, 1):
            problems.append(f"ground truth ({light_id}, {lane_id}): value {value!r} not in {{0, 1}}")
    return problems


def validate_scene(scene: Scene, road_map: RoadMap) -> list[str]:
    """Return invariant violations of a scene relative to a map."""
    problems: list[str] = []
    tag = f"scene {scene.scene_id}"
    if not scene.sample_period > 0:
        problems.append(f"{tag}: sample period must be positive")
        return problems

    egos = [t.vehicle_id for t in scene.tracks if t.is_ego]
    if len(egos) != 1:
        problems.append(f"{tag}: expected exactly one ego track, found {len(egos)}")

    t_min, t_max = np.inf, -np.inf
    for track in scene.tracks:
        ts = track.timestamps
        if len(ts) == 0:
            problems.append(f"{tag}: track {track.vehicle_id} is empty")
            continue
        t_min, t_max = min(t_min, ts[0]), max(t_max, ts[-1])
        steps = np.diff(ts)
        if np.any(steps <= 0):
            problems.append(f"{tag}: track {track.vehicle_id} timestamps not strictly increasing")
        elif np.any(np.abs(steps - scene.sample_period) > SAMPLE_PERIOD_TOLERANCE):
            problems.append(f"{tag}: track {track.vehicle_id} not sampled at the scene period")

    seen: set[tuple[str, float]] = set()
    for obs in scene.light_observations:
        if obs.light_id not in road_map.light_ids:
            problems.append(f"{tag}: observation of unknown light {obs.light_id}")
        key = (obs.light_id, obs.timestamp)
        if key in seen:
            problems.append(f"{tag}: duplicate observation of {obs.light_id} at t={obs.timestamp}")
        seen.add(key)
        if not (t_min - SAMPLE_PERIOD_TOLERANCE <= obs.timestamp <= t_max + SAMPLE_PERIOD_TOLERANCE):
            problems.append(
                f"{tag}: observation of {obs.light_id} at t={obs.timestamp} outside track time range"
            )
    return problems
