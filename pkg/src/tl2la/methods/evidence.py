"""Evidence extraction: per-scene accumulation of contributions and passes.

A scene contributes, for every (light, lane) pair it co-observes, the sum of
per-frame heuristic values, one scene vote derived from the sign of that sum,
and the number of intersection passes with the light's state at each pass.
Stores from different scenes merge by field-wise addition, so a corpus can be
split across workers in any way.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import islice
from typing import Iterable, Iterator, Mapping

import numpy as np

from ..kinematics import speed_and_accel
from ..model import PairKey, RoadMap, Scene, TrafficLightState, TurnType
from .heuristic import STATE_CODES, TURN_CODES, HeuristicConfig, heuristic_contributions

KMH = 1 / 3.6
SCOPES = ("all", "ego")
WORKERS_ENV = "TL2LA_WORKERS"

_RED = STATE_CODES[TrafficLightState.RED]


@dataclass(frozen=True)
class RejectionConfig:
    pass_distance: float = 1.0
    pass_speed: float = 15.0  # km/h
    right_turn_pass_speed: float = 25.0  # km/h
    p: float = 0.05
    alpha: float = 0.001

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.pass_speed < self.right_turn_pass_speed:
            raise ValueError("pass_speed must be below right_turn_pass_speed")
        if not self.pass_distance > 0:
            raise ValueError("pass_distance must be positive")


@dataclass(frozen=True)
class PairEvidence:
    contribution: int = 0
    votes_assign: int = 0
    votes_reject: int = 0
    passes: int = 0
    red_passes: int = 0
    pass_scenes: int = 0

    def __add__(self, other: "PairEvidence") -> "PairEvidence":
        return PairEvidence(
            self.contribution + other.contribution,
            self.votes_assign + other.votes_assign,
            self.votes_reject + other.votes_reject,
            self.passes + other.passes,
            self.red_passes + other.red_passes,
            self.pass_scenes + other.pass_scenes,
        )

    @property
    def scenes(self) -> int:
        return self.votes_assign + self.votes_reject


@dataclass(frozen=True)
class EvidenceStore:
    pairs: Mapping[PairKey, PairEvidence] = field(default_factory=dict)

    def __add__(self, other: "EvidenceStore") -> "EvidenceStore":
        return EvidenceStore.merge([self, other])

    def __len__(self) -> int:
        return len(self.pairs)

    def __getitem__(self, key: PairKey) -> PairEvidence:
        return self.pairs[key]

    def __contains__(self, key) -> bool:
        return key in self.pairs

    @staticmethod
    def merge(stores: Iterable["EvidenceStore"]) -> "EvidenceStore":
        acc = EvidenceAccumulator()
        for store in stores:
            acc.add_store(store)
        return acc.freeze()


class EvidenceAccumulator:
    """Mutable running sum of stores, used to merge many stores cheaply."""

    def __init__(self):
        self.sums: dict[PairKey, list[int]] = {}

    def add(self, key: PairKey, values: Iterable[int]) -> None:
        row = self.sums.get(key)
        if row is None:
            self.sums[key] = list(values)
        else:
            for i, v in enumerate(values):
                row[i] += v

    def add_store(self, store: EvidenceStore) -> None:
        for key, ev in store.pairs.items():
            self.add(key, (ev.contribution, ev.votes_assign, ev.votes_reject,
                           ev.passes, ev.red_passes, ev.pass_scenes))

    def freeze(self) -> EvidenceStore:
        return EvidenceStore({key: PairEvidence(*self.sums[key]) for key in sorted(self.sums)})


def _light_tables(scene: Scene) -> dict[str, tuple[int, np.ndarray, np.ndarray]]:
    """Per light: first frame, state code per frame (-1 unobserved), state duration."""
    dt = scene.sample_period
    by_light: dict[str, list[tuple[int, int]]] = {}
    for obs in scene.light_observations:
        by_light.setdefault(obs.light_id, []).append(
            (int(round(obs.timestamp / dt)), STATE_CODES[obs.state])
        )
    tables = {}
    for light_id, entries in by_light.items():
        entries.sort()
        frames = np.array([f for f, _ in entries])
        codes = np.array([c for _, c in entries])
        changed = np.ones(len(codes), dtype=bool)
        changed[1:] = codes[1:] != codes[:-1]
        run_start = np.maximum.accumulate(np.where(changed, frames, frames[0]))
        f0 = int(frames[0])
        dense_codes = np.full(int(frames[-1]) - f0 + 1, -1, dtype=np.int64)
        dense_dur = np.zeros(len(dense_codes))
        dense_codes[frames - f0] = codes
        dense_dur[frames - f0] = (frames - run_start) * dt
        tables[light_id] = (f0, dense_codes, dense_dur)
    return tables


def _lookup(table, frames: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    f0, codes, durations = table
    rel = frames - f0
    ok = (rel >= 0) & (rel < len(codes))
    out_codes = np.full(len(frames), -1, dtype=np.int64)
    out_dur = np.zeros(len(frames))
    out_codes[ok] = codes[rel[ok]]
    out_dur[ok] = durations[rel[ok]]
    return out_codes, out_dur


def _nearest_state(table, frame: int) -> int:
    """Observed state at the frame, else one sample earlier, else one later."""
    for f in (frame, frame - 1, frame + 1):
        code, _ = _lookup(table, np.array([f]))
        if code[0] >= 0:
            return int(code[0])
    return -1


def _scene_samples(scene: Scene, scope: str, smooth: bool):
    """Stack located-or-not samples of all in-scope tracks with their kinematics."""
    dt = scene.sample_period
    veh, frames, pos, speed, accel = [], [], [], [], []
    for v, track in enumerate(scene.tracks):
        if scope == "ego" and not track.is_ego:
            continue
        f = np.rint(track.timestamps / dt).astype(np.int64)
        breaks = np.flatnonzero(np.diff(f) != 1) + 1
        for lo, hi in zip(np.r_[0, breaks], np.r_[breaks, len(f)]):
            if hi - lo < 3:
                continue
            sp, ac = speed_and_accel(track.positions[lo:hi], dt, smooth=smooth)
            veh.append(np.full(hi - lo, v))
            frames.append(f[lo:hi])
            pos.append(track.positions[lo:hi])
            speed.append(sp)
            accel.append(ac)
    if not veh:
        return None
    return (np.concatenate(veh), np.concatenate(frames), np.concatenate(pos),
            np.concatenate(speed), np.concatenate(accel))


def extract_scene_evidence(
    scene: Scene,
    road_map: RoadMap,
    heuristic: HeuristicConfig = HeuristicConfig(),
    rejection: RejectionConfig = RejectionConfig(),
    scope: str = "all",
    smooth: bool = False,
) -> EvidenceStore:
    if scope not in SCOPES:
        raise ValueError(f"scope must be one of {SCOPES}, got {scope!r}")
    tables = _light_tables(scene)
    stacked = _scene_samples(scene, scope, smooth)
    if stacked is None or not tables:
        return EvidenceStore()
    veh, frames, pos, speed, accel = stacked

    index = road_map.geometry
    lane = index.locate_many(pos)
    keep = lane >= 0
    if not keep.any():
        return EvidenceStore()
    veh, frames, pos, speed, accel, lane = (a[keep] for a in (veh, frames, pos, speed, accel, lane))
    dist = index.distances(pos, lane)
    n_lanes = len(index.lane_ids)
    turn_of_lane = np.array([TURN_CODES[l.turn_type] for l in index.lanes])
    turn = turn_of_lane[lane]

    # lead vehicle: minimal distance among vehicles on the same lane and frame
    slot = (frames - frames.min()) * n_lanes + lane
    uniq, inverse = np.unique(slot, return_inverse=True)
    closest = np.full(len(uniq), np.inf)
    np.minimum.at(closest, inverse, dist)
    lead = dist <= closest[inverse]

    rows: dict[PairKey, list[int]] = {}
    for light_id in sorted(tables):
        codes, durations = _lookup(tables[light_id], frames)
        seen = codes >= 0
        if not seen.any():
            continue
        h = heuristic_contributions(
            speed[seen], accel[seen], dist[seen], lead[seen],
            turn[seen], codes[seen], durations[seen], heuristic,
        )
        lanes_seen = lane[seen]
        sums = np.zeros(n_lanes, dtype=np.int64)
        np.add.at(sums, lanes_seen, h)
        for i in np.unique(lanes_seen):
            total = int(sums[i])
            rows[(light_id, index.lane_ids[i])] = [total, int(total > 0), int(total <= 0), 0, 0, 0]

    # one pass per (vehicle, lane): first sample close to the entry above the speed threshold
    threshold = np.where(
        turn == TURN_CODES[TurnType.RIGHT_TURN],
        rejection.right_turn_pass_speed * KMH,
        rejection.pass_speed * KMH,
    )
    candidates = np.flatnonzero((dist < rejection.pass_distance) & (speed > threshold))
    if len(candidates):
        _, first = np.unique(veh[candidates] * n_lanes + lane[candidates], return_index=True)
        for i in sorted(candidates[first]):
            lane_id = index.lane_ids[lane[i]]
            for light_id in sorted(tables):
                code = _nearest_state(tables[light_id], int(frames[i]))
                if code < 0:
                    continue
                row = rows.setdefault((light_id, lane_id), [0, 0, 0, 0, 0, 0])
                row[3] += 1
                row[4] += int(code == _RED)
    for row in rows.values():
        row[5] = int(row[3] > 0)
    return EvidenceStore({key: PairEvidence(*rows[key]) for key in sorted(rows)})


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)


def _batched(items: Iterable, size: int) -> Iterator[list]:
    it = iter(items)
    while batch := list(islice(it, size)):
        yield batch


_worker_state: dict = {}


def _init_worker(road_map, heuristic, rejection, scope, smooth):
    _worker_state.update(road_map=road_map, heuristic=heuristic, rejection=rejection,
                         scope=scope, smooth=smooth)


def _extract_batch(scenes: list[Scene]) -> EvidenceStore:
    s = _worker_state
    return EvidenceStore.merge(
        extract_scene_evidence(scene, s["road_map"], s["heuristic"], s["rejection"], s["scope"], s["smooth"])
        for scene in scenes
    )


def extract_corpus(
    scenes: Iterable[Scene],
    road_map: RoadMap,
    heuristic: HeuristicConfig = HeuristicConfig(),
    rejection: RejectionConfig = RejectionConfig(),
    scope: str = "all",
    smooth: bool = False,
    workers: int = 1,
    batch_size: int = 64,
) -> EvidenceStore:
    """Extract and merge evidence over a corpus, optionally in worker processes."""
    acc = EvidenceAccumulator()
    if workers <= 1:
        for scene in scenes:
            acc.add_store(extract_scene_evidence(scene, road_map, heuristic, rejection, scope, smooth))
        return acc.freeze()
    with ProcessPoolExecutor(
        max_workers=workers,
        initializer=_init_worker,
        initargs=(road_map, heuristic, rejection, scope, smooth),
    ) as pool:
        for store in pool.map(_extract_batch, _batched(scenes, batch_size)):
            acc.add_store(store)
    return acc.freeze()
