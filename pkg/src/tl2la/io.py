"""File formats: map documents, scene and prediction record streams.

Map file (JSON object)::

    {"format_version": 1,
     "lanes": [{"id": "N0", "left_boundary": [[x, y], ...], "right_boundary": [[x, y], ...],
                "turn_type": "left_turn" | "right_turn" | "straight",
                "successor_ids": ["..."], "entry_point": [x, y]}, ...],
     "lights": [{"id": "N-main", "intersection_id": "X0"}, ...],
     "ground_truth": [{"light_id": "N-main", "lane_id": "N0", "value": 1}, ...] | null}

Scenes file: one JSON object per line::

    {"format_version": 1, "scene_id": "...", "sample_period": 0.1,
     "tracks": [{"vehicle_id": "...", "is_ego": false, "samples": [[t, x, y], ...]}, ...],
     "light_observations": [{"light_id": "...", "timestamp": t, "state": "red" | "green"}, ...]}

A track may carry ``"past"`` and ``"future"`` sample lists instead of
``"samples"`` (the layout of motion-prediction datasets); readers join them.

Predictions file: one JSON object per line with light_id, lane_id, label,
confidence, method and evidence_count.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping

import numpy as np

from .methods.predict import AssignmentPrediction
from .model import Lane, LightObservation, RoadMap, Scene, TrafficLight, TrafficLightState, TurnType, VehicleTrack
from .transform import SplitTrajectory, merge_trajectory_splits

FORMAT_VERSION = 1


class FormatError(ValueError):
    pass


def dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=False, allow_nan=False)


def _check_version(record: Mapping, where: str) -> None:
    version = record.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatError(f"{where}: unsupported format_version {version!r}")


def _point(p, where: str) -> tuple[float, float]:
    if not isinstance(p, (list, tuple)) or len(p) != 2:
        raise FormatError(f"{where}: point must be [x, y], got {p!r}")
    return (float(p[0]), float(p[1]))


# ---- maps --------------------------------------------------------------------

def map_to_record(road_map: RoadMap) -> dict:
    truth = None
    if road_map.ground_truth is not None:
        truth = [
            {"light_id": light, "lane_id": lane, "value": int(value)}
            for (light, lane), value in sorted(road_map.ground_truth.items())
        ]
    return {
        "format_version": FORMAT_VERSION,
        "lanes": [
            {
                "id": lane.id,
                "left_boundary": [list(p) for p in lane.left_boundary],
                "right_boundary": [list(p) for p in lane.right_boundary],
                "turn_type": lane.turn_type.value,
                "successor_ids": list(lane.successor_ids),
                "entry_point": list(lane.entry_point),
            }
            for lane in road_map.lanes
        ],
        "lights": [{"id": l.id, "intersection_id": l.intersection_id} for l in road_map.lights],
        "ground_truth": truth,
    }


def map_from_record(record: Mapping) -> RoadMap:
    _check_version(record, "map")
    try:
        lanes = tuple(
            Lane(
                id=str(l["id"]),
                left_boundary=tuple(_point(p, f"lane {l['id']}") for p in l["left_boundary"]),
                right_boundary=tuple(_point(p, f"lane {l['id']}") for p in l["right_boundary"]),
                turn_type=TurnType(l["turn_type"]),
                successor_ids=tuple(str(s) for s in l.get("successor_ids", ())),
                entry_point=_point(l["entry_point"], f"lane {l['id']}"),
            )
            for l in record["lanes"]
        )
        lights = tuple(TrafficLight(str(l["id"]), str(l["intersection_id"])) for l in record["lights"])
        truth = record.get("ground_truth")
        if truth is not None:
            truth = {(str(g["light_id"]), str(g["lane_id"])): int(g["value"]) for g in truth}
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"map: malformed record ({exc.__class__.__name__}: {exc})") from exc
    return RoadMap(lanes, lights, truth)


def write_map(road_map: RoadMap, path) -> None:
    Path(path).write_text(json.dumps(map_to_record(road_map), indent=1) + "\n", encoding="utf-8")


def read_map(path) -> RoadMap:
    try:
        record = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(record, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return map_from_record(record)


# ---- scenes ------------------------------------------------------------------

def _samples(track: VehicleTrack) -> list[list[float]]:
    return [[float(t), float(p[0]), float(p[1])] for t, p in zip(track.timestamps, track.positions)]


def scene_to_record(scene: Scene) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "scene_id": scene.scene_id,
        "sample_period": scene.sample_period,
        "tracks": [
            {"vehicle_id": t.vehicle_id, "is_ego": t.is_ego, "samples": _samples(t)} for t in scene.tracks
        ],
        "light_observations": [
            {"light_id": o.light_id, "timestamp": o.timestamp, "state": o.state.value}
            for o in scene.light_observations
        ],
    }


def _split_samples(rows, where: str) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(rows, dtype=float)
    if arr.size == 0:
        return np.zeros(0), np.zeros((0, 2))
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise FormatError(f"{where}: samples must be [t, x, y] triples")
    return arr[:, 0], arr[:, 1:]


def _track_from_record(t: Mapping, where: str) -> VehicleTrack:
    vid = str(t["vehicle_id"])
    ego = bool(t.get("is_ego", False))
    if "samples" in t:
        ts, pos = _split_samples(t["samples"], f"{where} track {vid}")
        return VehicleTrack(vid, ts, pos, ego)
    past_t, past_p = _split_samples(t.get("past", []), f"{where} track {vid}")
    fut_t, fut_p = _split_samples(t.get("future", []), f"{where} track {vid}")
    return merge_trajectory_splits(SplitTrajectory(vid, past_t, past_p, fut_t, fut_p, ego))


def scene_from_record(record: Mapping, where: str = "scene") -> Scene:
    _check_version(record, where)
    try:
        tracks = tuple(_track_from_record(t, where) for t in record["tracks"])
        observations = tuple(
            LightObservation(str(o["light_id"]), float(o["timestamp"]), TrafficLightState(o["state"]))
            for o in record.get("light_observations", ())
        )
        return Scene(str(record["scene_id"]), float(record["sample_period"]), tracks, observations)
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{where}: malformed record ({exc.__class__.__name__}: {exc})") from exc


def write_scenes(scenes: Iterable[Scene], stream: IO[str]) -> int:
    count = 0
    for scene in scenes:
        stream.write(dumps(scene_to_record(scene)) + "\n")
        count += 1
    return count


def iter_scene_file(path) -> Iterator[Scene]:
    """Scenes of a file, parsed lazily; blank lines are skipped."""
    with open(path, encoding="utf-8") as stream:
        for lineno, line in enumerate(stream, 1):
            if not line.strip():
                continue
            where = f"{path} line {lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{where}: not valid JSON ({exc})") from exc
            if not isinstance(record, dict):
                raise FormatError(f"{where}: expected a JSON object")
            yield scene_from_record(record, where)


# ---- predictions -------------------------------------------------------------

def write_predictions(predictions: Iterable[AssignmentPrediction], stream: IO[str]) -> None:
    for p in predictions:
        stream.write(dumps(p.to_record()) + "\n")


def read_predictions(path) -> list[AssignmentPrediction]:
    out = []
    with open(path, encoding="utf-8") as stream:
        for lineno, line in enumerate(stream, 1):
            if not line.strip():
                continue
            try:
                out.append(AssignmentPrediction.from_record(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{path} line {lineno}: malformed prediction ({exc})") from exc
    return out
