"""Vehicle-to-lane matching and distances along lane centerlines.

Lane polygons are the left boundary followed by the reversed right boundary.
Containment uses the even-odd rule with points on an edge counted as inside.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import Lane, RoadMap, Scene

EDGE_EPS = 1e-9


class AmbiguousMatch(ValueError):
    """A position lies inside more than one lane polygon."""


class NotLocated(ValueError):
    """A vehicle is not on any lane at the requested time."""


@dataclass(frozen=True)
class LaneMatch:
    vehicle_id: str
    timestamp: float
    lane_id: Optional[str]


def points_in_polygon(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Even-odd containment for many points; boundary points count as inside."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    a = np.asarray(polygon, dtype=float)
    b = np.roll(a, -1, axis=0)
    px = points[:, 0:1]
    py = points[:, 1:2]
    ax, ay, bx, by = a[:, 0], a[:, 1], b[:, 0], b[:, 1]

    straddles = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
    crossings = straddles & (px < x_cross)
    inside = (np.count_nonzero(crossings, axis=1) % 2) == 1

    # on-edge test: collinear and within the segment's extent
    ex, ey = bx - ax, by - ay
    cross = ex * (py - ay) - ey * (px - ax)
    scale = np.maximum(np.hypot(ex, ey), 1.0)
    dot = (px - ax) * ex + (py - ay) * ey
    on_edge = (np.abs(cross) <= EDGE_EPS * scale) & (dot >= -EDGE_EPS) & (dot <= ex * ex + ey * ey + EDGE_EPS)
    return inside | on_edge.any(axis=1)


def project_onto_polyline(points: np.ndarray, line: np.ndarray) -> np.ndarray:
    """Arc-length coordinate of the nearest polyline point for each input point."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    a = line[:-1]
    seg = line[1:] - a
    seg_len2 = np.einsum("ij,ij->i", seg, seg)
    cum = np.concatenate(([0.0], np.cumsum(np.sqrt(seg_len2))))
    rel = points[:, None, :] - a[None, :, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(seg_len2 > 0, np.einsum("pij,ij->pi", rel, seg) / seg_len2, 0.0)
    t = np.clip(t, 0.0, 1.0)
    nearest = a[None, :, :] + t[:, :, None] * seg[None, :, :]
    d2 = np.sum((points[:, None, :] - nearest) ** 2, axis=2)
    j = np.argmin(d2, axis=1)
    rows = np.arange(len(points))
    return cum[j] + t[rows, j] * np.sqrt(seg_len2[j])


def polyline_length(line: np.ndarray) -> float:
    return float(np.sum(np.hypot(*np.diff(np.asarray(line, dtype=float), axis=0).T)))


class LaneIndex:
    """Per-map arrays used to locate many points at once."""

    def __init__(self, road_map: RoadMap):
        self.lane_ids = [lane.id for lane in road_map.lanes]
        self.lanes = list(road_map.lanes)
        self.position = {lane_id: i for i, lane_id in enumerate(self.lane_ids)}
        self.polygons = [lane.polygon for lane in self.lanes]
        self.bboxes = np.array(
            [np.concatenate((p.min(axis=0), p.max(axis=0))) for p in self.polygons]
        ).reshape(-1, 4)
        self.entry_s = np.array(
            [project_onto_polyline(np.asarray(lane.entry_point), lane.centerline)[0] for lane in self.lanes]
        )

    def locate_many(self, points: np.ndarray) -> np.ndarray:
        """Lane index per point, -1 where no lane contains it."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        result = np.full(len(points), -1, dtype=np.int64)
        hits = np.zeros(len(points), dtype=np.int64)
        for i, polygon in enumerate(self.polygons):
            x0, y0, x1, y1 = self.bboxes[i]
            cand = np.flatnonzero(
                (points[:, 0] >= x0 - EDGE_EPS)
                & (points[:, 0] <= x1 + EDGE_EPS)
                & (points[:, 1] >= y0 - EDGE_EPS)
                & (points[:, 1] <= y1 + EDGE_EPS)
            )
            if len(cand) == 0:
                continue
            inside = cand[points_in_polygon(points[cand], polygon)]
            result[inside] = i
            hits[inside] += 1
        if np.any(hits > 1):
            p = points[np.argmax(hits > 1)]
            raise AmbiguousMatch(f"position ({p[0]:.3f}, {p[1]:.3f}) lies in several lanes")
        return result

    def distances(self, points: np.ndarray, lane_idx: np.ndarray) -> np.ndarray:
        """Distance to the entry along each point's lane; NaN where lane_idx is -1."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        out = np.full(len(points), np.nan)
        for i in np.unique(lane_idx[lane_idx >= 0]):
            sel = lane_idx == i
            s = project_onto_polyline(points[sel], self.lanes[i].centerline)
            out[sel] = np.maximum(0.0, self.entry_s[i] - s)
        return out


def locate(position, road_map: RoadMap) -> Optional[str]:
    """Lane whose polygon contains ``position``, or None."""
    idx = road_map.geometry.locate_many(np.asarray(position, dtype=float))[0]
    return None if idx < 0 else road_map.geometry.lane_ids[idx]


def distance_to_entry(position, lane: Lane) -> float:
    """Centerline arc length from the projection of ``position`` to the lane entry."""
    line = lane.centerline
    s = project_onto_polyline(np.asarray(position, dtype=float), line)[0]
    s_entry = project_onto_polyline(np.asarray(lane.entry_point, dtype=float), line)[0]
    return max(0.0, float(s_entry - s))


def _position_at(track, timestamp: float, tol: float) -> Optional[np.ndarray]:
    i = int(np.searchsorted(track.timestamps, timestamp - tol))
    if i < len(track) and abs(track.timestamps[i] - timestamp) <= tol:
        return track.positions[i]
    return None


def is_lead(vehicle_id: str, timestamp: float, scene: Scene, road_map: RoadMap) -> bool:
    """True when no other vehicle on the same lane is strictly closer to the entry.

    Vehicles at exactly the same distance are all reported as lead.
    """
    tol = scene.sample_period / 2
    located = {}
    for track in scene.tracks:
        pos = _position_at(track, timestamp, tol)
        if pos is None:
            continue
        lane_id = locate(pos, road_map)
        if lane_id is not None:
            located[track.vehicle_id] = (lane_id, distance_to_entry(pos, road_map.lanes_by_id[lane_id]))
    if vehicle_id not in located:
        raise NotLocated(f"vehicle {vehicle_id} is on no lane at t={timestamp}")
    lane_id, dist = located[vehicle_id]
    return all(d >= dist for other, (l, d) in located.items() if l == lane_id and other != vehicle_id)
