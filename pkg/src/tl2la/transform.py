"""From prediction-dataset records to the map-learning representation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .geometry import polyline_length
from .model import Lane, PairKey, RoadMap, Scene, VehicleTrack
from .stats import DomainError

DEFAULT_DEPTH = 20.0
DEFAULT_MAX_DISTANCE = 20.0


class OverlapError(ValueError):
    pass


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class SplitTrajectory:
    """A track cut at the prediction time: history up to t, future after it."""

    vehicle_id: str
    past_timestamps: np.ndarray
    past_positions: np.ndarray
    future_timestamps: np.ndarray
    future_positions: np.ndarray
    is_ego: bool = False


def merge_trajectory_splits(split: SplitTrajectory) -> VehicleTrack:
    past_t = np.asarray(split.past_timestamps, dtype=float).reshape(-1)
    fut_t = np.asarray(split.future_timestamps, dtype=float).reshape(-1)
    if len(past_t) and len(fut_t) and not past_t[-1] < fut_t[0]:
        raise OverlapError(
            f"track {split.vehicle_id}: future starts at {fut_t[0]} "
            f"but past ends at {past_t[-1]}"
        )
    positions = np.concatenate([
        np.asarray(split.past_positions, dtype=float).reshape(-1, 2),
        np.asarray(split.future_positions, dtype=float).reshape(-1, 2),
    ])
    return VehicleTrack(split.vehicle_id, np.concatenate([past_t, fut_t]), positions, split.is_ego)


def scene_pairs(scene: Scene, road_map: RoadMap) -> set[PairKey]:
    dt = scene.sample_period
    light_frames: dict[str, set[int]] = {}
    for obs in scene.light_observations:
        light_frames.setdefault(obs.light_id, set()).add(scene.frame_of(obs.timestamp))
    if not light_frames or not scene.tracks:
        return set()
    index = road_map.geometry
    frames = np.concatenate([np.rint(t.timestamps / dt).astype(np.int64) for t in scene.tracks])
    points = np.concatenate([t.positions for t in scene.tracks])
    lane = index.locate_many(points)
    located = lane >= 0
    lane_frames: dict[int, set[int]] = {}
    for i in np.unique(lane[located]):
        lane_frames[int(i)] = set(frames[lane == i].tolist())
    pairs = set()
    for light_id, seen in light_frames.items():
        for i, present in lane_frames.items():
            if not seen.isdisjoint(present):
                pairs.add((light_id, index.lane_ids[i]))
    return pairs


def co_observed_pairs(scenes: Iterable[Scene], road_map: RoadMap) -> set[PairKey]:
    """Pairs (light, lane) such that some scene observes the light while a vehicle is on the lane."""
    out: set[PairKey] = set()
    for scene in scenes:
        out |= scene_pairs(scene, road_map)
    return out


def entry_lanes(road_map: RoadMap) -> list[Lane]:
    """Lanes that lead into the intersection: none of their successors is part of the map."""
    ids = road_map.lanes_by_id
    return [lane for lane in road_map.lanes if not any(s in ids for s in lane.successor_ids)]


def _join(parts: list[tuple]) -> tuple:
    out = list(parts[0])
    for part in parts[1:]:
        part = list(part)
        if np.allclose(out[-1], part[0], atol=1e-9, rtol=0):
            part = part[1:]
        out.extend(part)
    return tuple(out)


def build_lane_sequences(road_map: RoadMap, depth: float = DEFAULT_DEPTH) -> RoadMap:
    """Replace the lane graph by one lane per intersection entry.

    Each entry lane is extended upstream through its single predecessor
    until the centerline covers ``depth`` metres; a fork (two predecessors)
    ends the extension. Segments reached from more than one entry are left
    out of every sequence so that no position matches twice, and segments
    in no sequence are dropped. Sequences keep the entry lane's id, turn
    type and entry point.
    """
    ids = road_map.lanes_by_id
    predecessors: dict[str, list[str]] = {lane.id: [] for lane in road_map.lanes}
    for lane in road_map.lanes:
        for succ in lane.successor_ids:
            if succ == lane.id:
                raise TopologyError(f"lane {lane.id} is its own successor")
            if succ in predecessors:
                predecessors[succ].append(lane.id)

    chains: dict[str, list[str]] = {}
    for entry in entry_lanes(road_map):
        chain = [entry.id]
        covered = polyline_length(entry.centerline)
        current = entry.id
        while covered < depth and len(predecessors[current]) == 1:
            current = predecessors[current][0]
            if current in chain:
                raise TopologyError(f"cyclic predecessors through lane {current}")
            chain.append(current)
            covered += polyline_length(ids[current].centerline)
        chains[entry.id] = chain

    usage: dict[str, int] = {}
    for chain in chains.values():
        for lane_id in chain:
            usage[lane_id] = usage.get(lane_id, 0) + 1

    lanes = []
    for entry_id, chain in chains.items():
        members = [ids[l] for l in reversed(chain) if usage[l] == 1 or l == entry_id]
        entry = ids[entry_id]
        lanes.append(Lane(
            id=entry_id,
            left_boundary=_join([m.left_boundary for m in members]),
            right_boundary=_join([m.right_boundary for m in members]),
            turn_type=entry.turn_type,
            successor_ids=entry.successor_ids,
            entry_point=entry.entry_point,
        ))
    kept = {lane.id for lane in lanes}
    truth = None
    if road_map.ground_truth is not None:
        truth = {k: v for k, v in road_map.ground_truth.items() if k[1] in kept}
    return RoadMap(tuple(lanes), road_map.lights, truth)


def proximity_filter(scene: Scene, road_map: RoadMap, max_distance: float = DEFAULT_MAX_DISTANCE) -> Scene:
    """Keep only samples on a lane of ``road_map`` within ``max_distance`` of its entry.

    The ego track is kept whole: it anchors the scene's observations.
    """
    others = [t for t in scene.tracks if not t.is_ego and len(t)]
    keep_all = np.zeros(0, dtype=bool)
    if others:
        # one vectorized lookup for the whole scene
        points = np.concatenate([t.positions for t in others])
        index = road_map.geometry
        lane = index.locate_many(points)
        keep_all = lane >= 0
        dist = np.full(len(points), np.inf)
        dist[keep_all] = index.distances(points[keep_all], lane[keep_all])
        keep_all &= dist <= max_distance
    bounds = np.cumsum([0] + [len(t) for t in others])
    filtered = {}
    for track, lo, hi in zip(others, bounds[:-1], bounds[1:]):
        keep = keep_all[lo:hi]
        if keep.all():
            filtered[id(track)] = track
        elif keep.any():
            filtered[id(track)] = VehicleTrack(track.vehicle_id, track.timestamps[keep], track.positions[keep])
    tracks = [t if t.is_ego else filtered[id(t)] for t in scene.tracks if t.is_ego or id(t) in filtered]
    return Scene(scene.scene_id, scene.sample_period, tuple(tracks), scene.light_observations)


@dataclass(frozen=True)
class CorpusStats:
    scene_count: int
    scene_duration: float  # s
    unique_roadway_length: float  # km
    density: float  # s/km
    total_time: float  # h


def corpus_stats(scene_count: float, scene_duration: float, roadway_length: float) -> CorpusStats:
    """Recording density: seconds of recording per kilometre of distinct roadway."""
    for name, value in (("scene_count", scene_count), ("scene_duration", scene_duration),
                        ("roadway_length", roadway_length)):
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value}")
    seconds = scene_count * scene_duration
    return CorpusStats(scene_count, scene_duration, roadway_length, seconds / roadway_length, seconds / 3600.0)

