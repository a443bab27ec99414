"""Named scenarios, each exhibiting one phenomenon the methods must cope with."""

from __future__ import annotations

from enum import Enum

from ..model import TurnType
from .config import COMPASS, LaneSpec, PhaseSchedule, ScenarioConfig


class Preset(Enum):
    BASIC_4WAY = "Basic4Way"
    PROTECTED_LEFT = "ProtectedLeft"
    RIGHT_TURN_ON_RED = "RightTurnOnRed"
    SYNCHRONIZED_LIGHTS = "SynchronizedLights"
    RED_RUNNERS = "RedRunners"


def _split_phasing(green: float, signal: str = "main") -> dict[str, PhaseSchedule]:
    """One exclusive green per branch, served in compass order."""
    red = green * (len(COMPASS) - 1)
    return {f"{b}-{signal}": PhaseSchedule(green, red, i * green) for i, b in enumerate(COMPASS)}


def _basic() -> ScenarioConfig:
    return ScenarioConfig(
        lanes_per_branch=(LaneSpec(TurnType.LEFT_TURN), LaneSpec(TurnType.STRAIGHT)),
        signal_plan=_split_phasing(15.0),
    )


def _protected_left() -> ScenarioConfig:
    # each branch: left arrow, then its through movement
    plan = {}
    for i, b in enumerate(COMPASS):
        plan[f"{b}-left"] = PhaseSchedule(10.0, 70.0, 20.0 * i)
        plan[f"{b}-main"] = PhaseSchedule(10.0, 70.0, 20.0 * i + 10.0)
    return ScenarioConfig(
        lanes_per_branch=(LaneSpec(TurnType.LEFT_TURN, "left"), LaneSpec(TurnType.STRAIGHT, "main")),
        signal_plan=plan,
    )


def _right_turn_on_red() -> ScenarioConfig:
    return ScenarioConfig(
        lanes_per_branch=(LaneSpec(TurnType.STRAIGHT), LaneSpec(TurnType.RIGHT_TURN)),
        signal_plan=_split_phasing(15.0),
        right_turn_on_red_rate=0.6,
    )


def _synchronized() -> ScenarioConfig:
    # classic two-phase plan: opposite branches share one program
    plan = {
        "N-main": PhaseSchedule(30.0, 30.0, 0.0),
        "S-main": PhaseSchedule(30.0, 30.0, 0.0),
        "E-main": PhaseSchedule(30.0, 30.0, 30.0),
        "W-main": PhaseSchedule(30.0, 30.0, 30.0),
    }
    return ScenarioConfig(
        lanes_per_branch=(LaneSpec(TurnType.LEFT_TURN), LaneSpec(TurnType.STRAIGHT)),
        signal_plan=plan,
        observe="all",
    )


def preset(name: Preset | str) -> ScenarioConfig:
    """Configuration for a named scenario.

    * Basic4Way: four branches, left and through lane under one head per
      branch, exclusive green per branch.
    * ProtectedLeft: separate left-arrow and through heads per branch.
    * RightTurnOnRed: through and right-turn lane; 60% of right-turning
      drivers go on red after stopping.
    * SynchronizedLights: opposite branches run identical programs, and
      every light is visible in every scene.
    * RedRunners: Basic4Way with 2% of drivers ignoring the signal.
    """
    name = Preset(name)
    if name is Preset.BASIC_4WAY:
        return _basic()
    if name is Preset.PROTECTED_LEFT:
        return _protected_left()
    if name is Preset.RIGHT_TURN_ON_RED:
        return _right_turn_on_red()
    if name is Preset.SYNCHRONIZED_LIGHTS:
        return _synchronized()
    return _basic().with_(compliance_rate=0.98)


def preset_names() -> list[str]:
    return [p.value for p in Preset]
