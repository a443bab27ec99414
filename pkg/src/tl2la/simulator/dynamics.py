"""Longitudinal driver model for one approach lane.

Lanes never interact, so a scene is simulated lane by lane. Positions are
arc lengths along the approach (0 where vehicles appear, ``s_entry`` at the
intersection entry). Each step every vehicle targets the largest speed that
respects the cruise speed, its leader and, when it has decided to stop, its
stop point; the acceleration toward that target is bounded.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

CRUISE_SPEED = 40.0 / 3.6
MAX_ACCEL = 2.5
COMFORT_DECEL = 3.0
MAX_DECEL = 3.8
VEHICLE_LENGTH = 4.5
MIN_GAP = 2.0
# a green is used only if the entry is reached this long before it ends
GO_MARGIN = 2.0
RTOR_WAIT = 2.0
# right turns on red are taken slowly: no faster than this at the entry
RTOR_SPEED = 20.0 / 3.6
STANDSTILL = 1e-6


@njit(cache=True)
def time_to_cover(gap, v):
    """Time to drive ``gap`` from speed ``v`` accelerating at MAX_ACCEL up to cruise speed."""
    if gap <= 0.0:
        return 0.0
    if v >= CRUISE_SPEED:
        return gap / v
    d_acc = (CRUISE_SPEED * CRUISE_SPEED - v * v) / (2.0 * MAX_ACCEL)
    if gap <= d_acc:
        return (math.sqrt(v * v + 2.0 * MAX_ACCEL * gap) - v) / MAX_ACCEL
    return (CRUISE_SPEED - v) / MAX_ACCEL + (gap - d_acc) / CRUISE_SPEED


@njit(cache=True)
def _clamp(x, lo, hi):
    return min(max(x, lo), hi)


@njit(cache=True)
def _approach(v, target_speed, dt):
    return _clamp((target_speed - v) / dt, -MAX_DECEL, MAX_ACCEL)


@njit(cache=True)
def safe_speed(room, decel, dt):
    """Largest speed for the next step that still allows stopping within ``room``.

    Positions advance with the new speed (v' dt) and braking at ``decel``
    needs v'^2 / (2 decel) more, so v' dt + v'^2 / (2 decel) <= room.
    """
    if room <= 0.0:
        return 0.0
    return decel * (math.sqrt(dt * dt + 2.0 * room / decel) - dt)


@njit(cache=True)
def can_stop(v, room, dt):
    return v - MAX_DECEL * dt <= safe_speed(room, MAX_DECEL, dt) + 1e-9


@njit(cache=True)
def _stop_accel(v, room, dt):
    """Acceleration toward rest ``room`` metres ahead, comfortably when possible."""
    target = safe_speed(room, COMFORT_DECEL, dt)
    if v - MAX_DECEL * dt > target:
        target = safe_speed(room, MAX_DECEL, dt)
    return _approach(v, target, dt)


@njit(cache=True)
def simulate_lane(
    arrivals, stop_offset, reaction, obeys, rtor, forced,
    controlled, right_turn, green, red, offset,
    t0, dt, n_steps, first_frame, n_frames, s_entry, s_exit,
):
    """Run one lane and return arc lengths (vehicles x frames, NaN when absent) and speeds.

    ``arrivals`` are sorted times at which vehicles want to enter at s=0;
    a vehicle waits while the entrance is blocked, keeping arrival order.
    ``forced`` vehicles enter on time regardless; pending earlier arrivals
    are then dropped. Step k covers time t0 + k*dt; frames are the steps
    from ``first_frame`` on.
    """
    n = arrivals.shape[0]
    s = np.zeros(n)
    v = np.zeros(n)
    a = np.zeros(n)
    state = np.zeros(n, dtype=np.int64)  # 0 pending, 1 active, 2 gone, 3 dropped
    committed = np.zeros(n, dtype=np.bool_)
    waited = np.zeros(n)
    released = np.full(n, -1.0)
    out_s = np.full((n, n_frames), np.nan)
    out_v = np.full((n, n_frames), np.nan)
    cycle = green + red
    next_spawn = 0
    last = -1  # most recently spawned vehicle still on the lane

    for k in range(n_steps):
        t = t0 + k * dt

        # spawning in arrival order
        while next_spawn < n and arrivals[next_spawn] <= t:
            j = next_spawn
            gap = 1e9
            v_lead = CRUISE_SPEED
            if last >= 0 and state[last] == 1:
                gap = s[last] - VEHICLE_LENGTH - MIN_GAP
                v_lead = v[last]
            if gap < 0.0 and not forced[j]:
                break
            if forced[j]:
                for q in range(next_spawn):
                    if state[q] == 0:
                        state[q] = 3
            s[j] = min(0.0, gap)
            room = max(gap, 0.0) + v_lead * v_lead / (2.0 * MAX_DECEL)
            v[j] = min(CRUISE_SPEED, safe_speed(room, COMFORT_DECEL, dt))
            state[j] = 1
            last = j
            next_spawn += 1

        frame = k - first_frame
        if 0 <= frame < n_frames:
            for i in range(n):
                if state[i] == 1:
                    out_s[i, frame] = s[i]
                    out_v[i, frame] = v[i]
        if k == n_steps - 1:
            break

        phase = (t - offset) % cycle
        is_green = phase < green
        leader = -1
        for i in range(n):
            if state[i] != 1:
                continue
            target = CRUISE_SPEED
            acc = _approach(v[i], target, dt)
            if leader >= 0:
                # stop behind wherever the leader could stop
                gap = s[leader] - s[i] - VEHICLE_LENGTH - MIN_GAP
                room = gap + v[leader] * v[leader] / (2.0 * MAX_DECEL)
                acc = min(acc, _approach(v[i], safe_speed(room, COMFORT_DECEL, dt), dt))
            to_entry = s_entry - s[i]
            if controlled and obeys[i] and not committed[i] and to_entry > 0.0:
                stop_needed = True
                if is_green:
                    remaining = green - phase
                    stop_needed = time_to_cover(to_entry, v[i]) + GO_MARGIN > remaining
                elif right_turn and rtor[i] and waited[i] >= RTOR_WAIT:
                    committed[i] = True
                    stop_needed = False
                if stop_needed:
                    room = to_entry - stop_offset[i]
                    if not can_stop(v[i], room, dt):
                        room = to_entry - 0.5
                    if can_stop(v[i], room, dt):
                        acc = min(acc, _stop_accel(v[i], room, dt))
                        if v[i] <= STANDSTILL and room < 0.1 and not is_green:
                            waited[i] += dt
                    else:
                        committed[i] = True
            if committed[i] and rtor[i] and right_turn and to_entry > 0.0:
                # creep through the turn on red
                acc = min(acc, _approach(v[i], RTOR_SPEED, dt))
            # reaction delay when moving off from standstill
            if v[i] <= STANDSTILL:
                if acc > 1e-9:
                    if released[i] < 0.0:
                        released[i] = t
                    if t - released[i] < reaction[i]:
                        acc = 0.0
                else:
                    released[i] = -1.0
            else:
                released[i] = -1.0
            a[i] = acc
            leader = i

        prev = -1
        for i in range(n):
            if state[i] != 1:
                continue
            nv = v[i] + a[i] * dt
            if nv < STANDSTILL:
                nv = 0.0
            ns = s[i] + nv * dt
            v[i] = nv
            s[i] = ns
            if prev >= 0 and state[prev] == 1:
                limit = s[prev] - VEHICLE_LENGTH
                if s[i] > limit:
                    s[i] = limit
            if s[i] > s_exit and not forced[i]:
                state[i] = 2
            else:
                prev = i
    return out_s, out_v
