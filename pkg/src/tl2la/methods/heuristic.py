"""Per-frame contribution values from a vehicle's motion and a light's state.

Positive values support an assignment between the light and the vehicle's
lane, negative values speak against it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..model import TrafficLightState, TurnType


class Pattern(Enum):
    STATIONARY = "stationary"
    MOVING = "continuously_moving"
    ACCEL_FROM_STOP = "acceleration_from_stationary"
    ACCEL_MOVING = "acceleration_while_moving"
    DECELERATION = "deceleration"
    OTHER = "other"


@dataclass(frozen=True)
class HeuristicConfig:
    stop_zone: float = 8.0
    slow_zone: float = 20.0
    reaction_time_red: float = 1.0
    reaction_time_green: float = 3.0
    vel_threshold: float = 1.0
    acc_threshold: float = 1.0
    # sum every matching row of a group instead of taking the most specific one
    cumulative: bool = False

    def __post_init__(self):
        values = (
            self.stop_zone, self.slow_zone, self.reaction_time_red,
            self.reaction_time_green, self.vel_threshold, self.acc_threshold,
        )
        if any(not v > 0 for v in values):
            raise ValueError("heuristic thresholds must be positive")
        if not self.stop_zone < self.slow_zone:
            raise ValueError("stop_zone must be smaller than slow_zone")


@dataclass(frozen=True)
class ContextSnapshot:
    vehicle_id: str
    light_id: str
    lane_id: str
    timestamp: float
    speed: float
    accel: float
    distance: float
    is_lead: bool
    turn_type: TurnType
    state: TrafficLightState
    state_duration: float


# Condition names used by the rule table.
STOP = "stop_zone"
SLOW = "slow_zone"
LEAD = "is_lead"
AFTER_RED_REACTION = "reaction_red"
AFTER_GREEN_REACTION = "reaction_green"
NOT_RIGHT = "not_right_turn"
LEFT = "left_turn"
STRAIGHT = "straight"

RED, GREEN = TrafficLightState.RED, TrafficLightState.GREEN


@dataclass(frozen=True)
class Rule:
    pattern: Pattern
    state: TrafficLightState
    conditions: tuple[str, ...]
    value: int


# Rows grouped by kinematic pattern, then light state.
RULES: tuple[Rule, ...] = (
    Rule(Pattern.STATIONARY, RED, (STOP,), +2),
    Rule(Pattern.STATIONARY, GREEN, (LEAD,), -1),
    Rule(Pattern.STATIONARY, GREEN, (LEAD, AFTER_GREEN_REACTION), -3),
    Rule(Pattern.MOVING, RED, (SLOW,), -1),
    Rule(Pattern.MOVING, RED, (STOP, AFTER_RED_REACTION), -3),
    Rule(Pattern.MOVING, GREEN, (SLOW,), +3),
    Rule(Pattern.MOVING, GREEN, (STOP,), +5),
    Rule(Pattern.ACCEL_FROM_STOP, RED, (STOP, NOT_RIGHT), -2),
    # printed with the red reaction time although the state is green
    Rule(Pattern.ACCEL_FROM_STOP, GREEN, (SLOW, AFTER_RED_REACTION), +3),
    Rule(Pattern.ACCEL_MOVING, RED, (SLOW,), -1),
    Rule(Pattern.ACCEL_MOVING, RED, (STOP, AFTER_RED_REACTION), -3),
    Rule(Pattern.ACCEL_MOVING, GREEN, (SLOW,), +1),
    Rule(Pattern.DECELERATION, RED, (SLOW,), +2),
    Rule(Pattern.DECELERATION, GREEN, (STOP, LEAD, LEFT), -1),
    Rule(Pattern.DECELERATION, GREEN, (STOP, LEAD, STRAIGHT), -2),
)


def _specificity(rule: Rule) -> tuple[int, int]:
    # more conjuncts first; at equal count a stop-zone row beats a slow-zone row
    return (-len(rule.conditions), 0 if STOP in rule.conditions else 1)


GROUPS: dict[tuple[Pattern, TrafficLightState], tuple[Rule, ...]] = {}
for _rule in RULES:
    GROUPS.setdefault((_rule.pattern, _rule.state), ())
    GROUPS[(_rule.pattern, _rule.state)] += (_rule,)
GROUPS = {key: tuple(sorted(rules, key=_specificity)) for key, rules in GROUPS.items()}


def classify(speed: float, accel: float, cfg: HeuristicConfig) -> Pattern:
    slow = abs(speed) < cfg.vel_threshold
    steady = abs(accel) < cfg.acc_threshold
    if steady:
        return Pattern.STATIONARY if slow else Pattern.MOVING
    if accel > 0:
        return Pattern.ACCEL_FROM_STOP if slow else Pattern.ACCEL_MOVING
    if accel < 0 and not slow:
        return Pattern.DECELERATION
    return Pattern.OTHER


def _holds(condition: str, ctx: ContextSnapshot, cfg: HeuristicConfig) -> bool:
    if condition == STOP:
        return ctx.distance < cfg.stop_zone
    if condition == SLOW:
        return ctx.distance < cfg.slow_zone
    if condition == LEAD:
        return ctx.is_lead
    if condition == AFTER_RED_REACTION:
        return ctx.state_duration > cfg.reaction_time_red
    if condition == AFTER_GREEN_REACTION:
        return ctx.state_duration > cfg.reaction_time_green
    if condition == NOT_RIGHT:
        return ctx.turn_type != TurnType.RIGHT_TURN
    if condition == LEFT:
        return ctx.turn_type == TurnType.LEFT_TURN
    if condition == STRAIGHT:
        return ctx.turn_type == TurnType.STRAIGHT
    raise KeyError(condition)


def heuristic_contribution(ctx: ContextSnapshot, cfg: HeuristicConfig = HeuristicConfig()) -> int:
    pattern = classify(ctx.speed, ctx.accel, cfg)
    matching = [
        rule.value
        for rule in GROUPS.get((pattern, ctx.state), ())
        if all(_holds(c, ctx, cfg) for c in rule.conditions)
    ]
    if not matching:
        return 0
    return sum(matching) if cfg.cumulative else matching[0]


TURN_CODES = {TurnType.LEFT_TURN: 0, TurnType.RIGHT_TURN: 1, TurnType.STRAIGHT: 2}
STATE_CODES = {RED: 0, GREEN: 1}


def heuristic_contributions(
    speed: np.ndarray,
    accel: np.ndarray,
    distance: np.ndarray,
    is_lead: np.ndarray,
    turn_code: np.ndarray,
    state_code: np.ndarray,
    state_duration: np.ndarray,
    cfg: HeuristicConfig = HeuristicConfig(),
) -> np.ndarray:
    """Array version of :func:`heuristic_contribution`.

    ``turn_code`` and ``state_code`` use :data:`TURN_CODES` / :data:`STATE_CODES`.
    """
    slow = np.abs(speed) < cfg.vel_threshold
    steady = np.abs(accel) < cfg.acc_threshold
    patterns = {
        Pattern.STATIONARY: slow & steady,
        Pattern.MOVING: ~slow & steady,
        Pattern.ACCEL_FROM_STOP: slow & ~steady & (accel > 0),
        Pattern.ACCEL_MOVING: ~slow & ~steady & (accel > 0),
        Pattern.DECELERATION: ~slow & ~steady & (accel < 0),
    }
    conditions = {
        STOP: distance < cfg.stop_zone,
        SLOW: distance < cfg.slow_zone,
        LEAD: np.asarray(is_lead, dtype=bool),
        AFTER_RED_REACTION: state_duration > cfg.reaction_time_red,
        AFTER_GREEN_REACTION: state_duration > cfg.reaction_time_green,
        NOT_RIGHT: turn_code != TURN_CODES[TurnType.RIGHT_TURN],
        LEFT: turn_code == TURN_CODES[TurnType.LEFT_TURN],
        STRAIGHT: turn_code == TURN_CODES[TurnType.STRAIGHT],
    }
    out = np.zeros(len(speed), dtype=np.int64)
    for (pattern, state), rules in GROUPS.items():
        group = patterns[pattern] & (state_code == STATE_CODES[state])
        if not group.any():
            continue
        unassigned = group.copy()
        for rule in rules:
            hit = group & np.logical_and.reduce([conditions[c] for c in rule.conditions])
            if not cfg.cumulative:
                hit &= unassigned
                unassigned &= ~hit
            out[hit] += rule.value
    return out
