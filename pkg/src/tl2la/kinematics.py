"""Speed and tangential acceleration from uniformly sampled positions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import VehicleTrack


class TooShort(ValueError):
    pass


@dataclass(frozen=True)
class KinematicSample:
    vehicle_id: str
    timestamp: float
    speed: float
    accel: float


def _derivative(values: np.ndarray, dt: float, axis: int = 0) -> np.ndarray:
    """Central differences inside, one-sided differences at both ends."""
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * dt)
    out[0] = (values[1] - values[0]) / dt
    out[-1] = (values[-1] - values[-2]) / dt
    return out


def median3(positions: np.ndarray) -> np.ndarray:
    """Three-sample running median per coordinate; endpoints are kept."""
    out = np.array(positions, dtype=float, copy=True)
    if len(out) >= 3:
        window = np.stack((positions[:-2], positions[1:-1], positions[2:]))
        out[1:-1] = np.median(window, axis=0)
    return out


def speed_and_accel(positions: np.ndarray, dt: float, smooth: bool = False) -> tuple[np.ndarray, np.ndarray]:
    positions = np.asarray(positions, dtype=float)
    if len(positions) < 3:
        raise TooShort(f"need at least 3 samples, got {len(positions)}")
    if smooth:
        positions = median3(positions)
    n = len(positions)
    speed = np.empty(n)
    speed[1:-1] = np.hypot(*(positions[2:] - positions[:-2]).T) / (2.0 * dt)
    speed[0] = np.hypot(*(positions[1] - positions[0])) / dt
    speed[-1] = np.hypot(*(positions[-1] - positions[-2])) / dt
    return speed, _derivative(speed, dt)


def differentiate_track(track: VehicleTrack, smooth: bool = False) -> list[KinematicSample]:
    """Per-sample speed (m/s) and acceleration along travel (m/s^2).

    The sample period is taken from the track's own timestamps.
    """
    if len(track) < 3:
        raise TooShort(f"track {track.vehicle_id}: need at least 3 samples, got {len(track)}")
    dt = float(track.timestamps[-1] - track.timestamps[0]) / (len(track) - 1)
    speed, accel = speed_and_accel(track.positions, dt, smooth=smooth)
    return [
        KinematicSample(track.vehicle_id, float(t), float(v), float(a))
        for t, v, a in zip(track.timestamps, speed, accel)
    ]
