"""Scene generation on a symmetric synthetic intersection.

Layout: ``branch_count`` approach branches around a square conflict box of
half-width ``BOX_HALF_WIDTH``. Branch b points outward at the compass angle
90 - b * 360 / branch_count degrees (N, E, S, W for four branches). Its
inbound lanes lie to the right of the branch axis, lane 0 next to the
median, each ``LANE_WIDTH`` wide and cut into ``SEGMENTS`` map lanes of
``SEGMENT_LENGTH`` metres. Vehicles cross the box straight ahead and leave
the scene at its far side; an ego driver is never removed.

Randomness: scene i draws everything from
``numpy.random.Generator(PCG64(SeedSequence([seed, i])))`` in this order:

1. scene start on the signal clock, uniform on [0, 3600) s
2. facing branch of the ego, integer in [0, branch_count)
3. ego lane when the ego drives, integer in [0, lanes_per_branch)
4. for every branch, then every lane in order: vehicle count (Poisson over
   warmup plus scene duration), sorted uniform arrival times, stop offsets
   U[2, 8] m, reaction delays U[1, 3] s, compliance draws, right-turn-on-red
   draws
5. detection noise: two uniform arrays of shape (frames, observed lights);
   the first selects corrupted frames, the second drops (< 0.5) or flips them
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np
from numba import njit

from ..model import Lane, LightObservation, RoadMap, Scene, TrafficLight, TrafficLightState, TurnType, VehicleTrack
from .config import ScenarioConfig
from .dynamics import simulate_lane

LANE_WIDTH = 3.5
BOX_HALF_WIDTH = 10.0
SEGMENT_LENGTH = 15.0
SEGMENTS = 3
APPROACH_LENGTH = SEGMENT_LENGTH * SEGMENTS
POINTS_PER_SEGMENT = 4
MIN_TRACK_SAMPLES = 3
INTERSECTION_ID = "X0"
SCENE_CLOCK_SPAN = 3600.0


def _axes(branch: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Outward unit vector of a branch and the right-hand normal of inbound traffic."""
    angle = math.radians(90.0 - branch * 360.0 / count)
    u = np.array([math.cos(angle), math.sin(angle)])
    # round away sin/cos noise so that compass branches are axis aligned
    u = np.round(u, 12) + 0.0
    d = -u
    return u, np.array([d[1], -d[0]])


def _lane_position(s, u, r, lateral):
    s = np.asarray(s, dtype=float)
    return np.outer(BOX_HALF_WIDTH + APPROACH_LENGTH - s, u) + r * lateral


def _pt(p) -> tuple[float, float]:
    return (float(p[0]), float(p[1]))


def segment_id(branch: str, lane: int, segment: int) -> str:
    return f"{branch}{lane}" if segment == 0 else f"{branch}{lane}/{segment}"


def build_map(config: ScenarioConfig) -> RoadMap:
    """Lanes, lights and ground truth of the configured intersection.

    A light "<branch>-<signal>" is assigned to exactly the entry lanes of
    its branch whose lane spec names that signal.
    """
    lanes = []
    for b, name in enumerate(config.branches):
        u, r = _axes(b, config.branch_count)
        for i, spec in enumerate(config.lanes_per_branch):
            for j in range(SEGMENTS):
                hi = APPROACH_LENGTH - j * SEGMENT_LENGTH
                s = np.linspace(hi - SEGMENT_LENGTH, hi, POINTS_PER_SEGMENT)
                left = _lane_position(s, u, r, i * LANE_WIDTH)
                right = _lane_position(s, u, r, (i + 1) * LANE_WIDTH)
                entry = _lane_position([hi], u, r, (i + 0.5) * LANE_WIDTH)[0]
                lanes.append(Lane(
                    id=segment_id(name, i, j),
                    left_boundary=tuple(_pt(p) for p in left),
                    right_boundary=tuple(_pt(p) for p in right),
                    turn_type=spec.turn_type,
                    successor_ids=() if j == 0 else (segment_id(name, i, j - 1),),
                    entry_point=_pt(entry),
                ))
    lights = tuple(TrafficLight(light_id, INTERSECTION_ID) for light_id in config.light_ids())
    truth = {}
    for light in lights:
        light_branch, signal = light.id.split("-", 1)
        for name in config.branches:
            for i, spec in enumerate(config.lanes_per_branch):
                truth[(light.id, segment_id(name, i, 0))] = int(name == light_branch and spec.signal == signal)
    return RoadMap(tuple(lanes), lights, truth)


@njit(cache=True)
def _green_mask(times, green, red, offset):
    out = np.empty(times.shape[0], dtype=np.bool_)
    cycle = green + red
    for i in range(times.shape[0]):
        out[i] = (times[i] - offset) % cycle < green
    return out


def scene_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


def generate_scene(config: ScenarioConfig, index: int) -> Scene:
    rng = scene_rng(config.seed, index)
    dt = config.sample_period
    n_frames = int(round(config.scene_duration / dt))
    warmup_steps = int(round(config.warmup / dt))
    n_steps = warmup_steps + n_frames
    start = rng.uniform(0.0, SCENE_CLOCK_SPAN)
    facing = int(rng.integers(config.branch_count))
    ego_lane = int(rng.integers(len(config.lanes_per_branch)))
    t0 = start - warmup_steps * dt
    horizon = n_steps * dt
    s_entry = APPROACH_LENGTH
    s_exit = APPROACH_LENGTH + 2 * BOX_HALF_WIDTH
    timestamps = np.round(np.arange(n_frames) * dt, 9)

    tracks = []
    ego_track = None
    for b, name in enumerate(config.branches):
        u, r = _axes(b, config.branch_count)
        for i, spec in enumerate(config.lanes_per_branch):
            count = int(rng.poisson(config.arrival_rate / 60.0 * horizon))
            arrivals = np.sort(rng.uniform(t0, t0 + horizon, count))
            stop_offset = rng.uniform(2.0, 8.0, count)
            reaction = rng.uniform(1.0, 3.0, count)
            obeys = rng.random(count) < config.compliance_rate
            rtor = rng.random(count) < config.right_turn_on_red_rate
            forced = np.zeros(count, dtype=bool)
            is_ego_lane = config.ego_driver and b == facing and i == ego_lane
            if is_ego_lane:
                # the ego appears at the upstream end when recording starts
                at = np.searchsorted(arrivals, start - dt / 2)
                arrivals = np.insert(arrivals, at, start - dt / 2)
                stop_offset = np.insert(stop_offset, at, 5.0)
                reaction = np.insert(reaction, at, 2.0)
                obeys = np.insert(obeys, at, True)
                rtor = np.insert(rtor, at, False)
                forced = np.insert(forced, at, True)
            if spec.signal is None:
                controlled, green, red, offset = False, 1.0, 1.0, 0.0
            else:
                plan = config.signal_plan[f"{name}-{spec.signal}"]
                controlled, green, red, offset = True, plan.green, plan.red, plan.offset
            s, _ = simulate_lane(
                arrivals, stop_offset, reaction, obeys, rtor, forced,
                controlled, spec.turn_type is TurnType.RIGHT_TURN, green, red, offset,
                t0, dt, n_steps, warmup_steps, n_frames, s_entry, s_exit,
            )
            lateral = (i + 0.5) * LANE_WIDTH
            for j in range(len(arrivals)):
                present = np.flatnonzero(~np.isnan(s[j]))
                if len(present) < MIN_TRACK_SAMPLES:
                    continue
                track = VehicleTrack(
                    f"{name}{i}-{j}", timestamps[present], _lane_position(s[j, present], u, r, lateral),
                    is_ego=bool(forced[j]),
                )
                if forced[j]:
                    ego_track = track
                else:
                    tracks.append(track)

    if ego_track is None:
        u, r = _axes(facing, config.branch_count)
        spot = u * (BOX_HALF_WIDTH + 10.0) + r * (len(config.lanes_per_branch) * LANE_WIDTH + 2.0)
        ego_track = VehicleTrack("ego", timestamps, np.tile(spot, (n_frames, 1)), is_ego=True)

    if config.observe == "all":
        observed = config.light_ids()
    else:
        prefix = config.branches[facing] + "-"
        observed = [l for l in config.light_ids() if l.startswith(prefix)]
    corrupt = rng.random((n_frames, len(observed))) < config.detection_noise
    dropped = rng.random((n_frames, len(observed))) < 0.5
    abs_times = t0 + (warmup_steps + np.arange(n_frames)) * dt
    observations = []
    for c, light_id in enumerate(observed):
        plan = config.signal_plan[light_id]
        green = _green_mask(abs_times, plan.green, plan.red, plan.offset)
        green ^= corrupt[:, c] & ~dropped[:, c]
        keep = ~(corrupt[:, c] & dropped[:, c])
        for f in np.flatnonzero(keep):
            state = TrafficLightState.GREEN if green[f] else TrafficLightState.RED
            observations.append(LightObservation(light_id, float(timestamps[f]), state))
    observations.sort(key=lambda o: (o.timestamp, o.light_id))
    return Scene(f"scene-{index:06d}", dt, (ego_track, *tracks), tuple(observations))


def iter_scenes(config: ScenarioConfig, start: int = 0, stop: int | None = None) -> Iterator[Scene]:
    """Scenes ``start`` .. ``stop`` of the corpus, generated lazily."""
    stop = config.scene_count if stop is None else stop
    for index in range(start, stop):
        yield generate_scene(config, index)


def generate(config: ScenarioConfig) -> tuple[RoadMap, list[Scene]]:
    return build_map(config), list(iter_scenes(config))
