"""Scenario configuration for the synthetic intersection generator."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from ..model import TrafficLightState, TurnType

COMPASS = ("N", "E", "S", "W")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LaneSpec:
    turn_type: TurnType
    # name of the branch signal head controlling this lane; None = uncontrolled
    signal: Optional[str] = "main"


@dataclass(frozen=True)
class PhaseSchedule:
    """Periodic signal program: green for ``green`` s starting at ``offset``, then red."""

    green: float
    red: float
    offset: float = 0.0

    @property
    def cycle(self) -> float:
        return self.green + self.red

    def state_at(self, t: float) -> TrafficLightState:
        phase = (t - self.offset) % self.cycle
        return TrafficLightState.GREEN if phase < self.green else TrafficLightState.RED

    def red_fraction(self) -> float:
        return self.red / self.cycle


def branch_names(count: int) -> tuple[str, ...]:
    if count == 4:
        return COMPASS
    return tuple(f"B{i}" for i in range(count))


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    branch_count: int = 4
    lanes_per_branch: tuple[LaneSpec, ...] = (
        LaneSpec(TurnType.LEFT_TURN),
        LaneSpec(TurnType.STRAIGHT),
    )
    # keyed by light id "<branch>-<signal>", e.g. "N-main"
    signal_plan: Mapping[str, PhaseSchedule] = field(default_factory=dict)
    arrival_rate: float = 6.0  # vehicles per minute and lane
    compliance_rate: float = 1.0
    right_turn_on_red_rate: float = 0.0
    detection_noise: float = 0.0
    scene_duration: float = 25.0
    sample_period: float = 0.1
    scene_count: int = 100
    # ego drives on a lane of the facing branch instead of watching from the roadside
    ego_driver: bool = False
    # "facing": ego sees the lights of one branch per scene; "all": every light
    observe: str = "facing"
    warmup: float = 40.0

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigError("; ".join(problems))

    @property
    def branches(self) -> tuple[str, ...]:
        return branch_names(self.branch_count)

    def light_ids(self) -> list[str]:
        signals = sorted({spec.signal for spec in self.lanes_per_branch if spec.signal is not None})
        return [f"{b}-{s}" for b in self.branches for s in signals]

    def problems(self) -> list[str]:
        out = []
        if not 1 <= self.branch_count <= 8:
            out.append("branch_count must be between 1 and 8")
        if not self.lanes_per_branch:
            out.append("at least one lane per branch is required")
        for name in ("compliance_rate", "right_turn_on_red_rate", "detection_noise"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                out.append(f"{name} must lie in [0, 1]")
        for name in ("scene_duration", "sample_period"):
            if not getattr(self, name) > 0:
                out.append(f"{name} must be positive")
        if self.arrival_rate < 0:
            out.append("arrival_rate must be nonnegative")
        if self.scene_count < 0:
            out.append("scene_count must be nonnegative")
        if self.warmup < 0:
            out.append("warmup must be nonnegative")
        if self.observe not in ("facing", "all"):
            out.append("observe must be 'facing' or 'all'")
        for light_id, schedule in self.signal_plan.items():
            if not (schedule.green > 0 and schedule.red > 0):
                out.append(f"{light_id}: phase durations must be positive")
        if self.branch_count >= 1 and self.lanes_per_branch:
            missing = [l for l in self.light_ids() if l not in self.signal_plan]
            if missing:
                out.append(f"no signal schedule for {', '.join(missing)}")
        return out

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "branch_count": self.branch_count,
            "lanes_per_branch": [
                {"turn_type": s.turn_type.value, "signal": s.signal} for s in self.lanes_per_branch
            ],
            "signal_plan": {
                k: {"green": v.green, "red": v.red, "offset": v.offset}
                for k, v in sorted(self.signal_plan.items())
            },
            "arrival_rate": self.arrival_rate,
            "compliance_rate": self.compliance_rate,
            "right_turn_on_red_rate": self.right_turn_on_red_rate,
            "detection_noise": self.detection_noise,
            "scene_duration": self.scene_duration,
            "sample_period": self.sample_period,
            "scene_count": self.scene_count,
            "ego_driver": self.ego_driver,
            "observe": self.observe,
            "warmup": self.warmup,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScenarioConfig":
        data = dict(data)
        if "lanes_per_branch" in data:
            data["lanes_per_branch"] = tuple(
                LaneSpec(TurnType(l["turn_type"]), l.get("signal", "main")) for l in data["lanes_per_branch"]
            )
        if "signal_plan" in data:
            data["signal_plan"] = {
                k: PhaseSchedule(float(v["green"]), float(v["red"]), float(v.get("offset", 0.0)))
                for k, v in data["signal_plan"].items()
            }
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(sorted(unknown))}")
        return cls(**data)

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()
