from .config import ConfigError, LaneSpec, PhaseSchedule, ScenarioConfig
from .generate import build_map, generate, generate_scene, iter_scenes
from .presets import Preset, preset, preset_names

__all__ = [
    "ConfigError",
    "LaneSpec",
    "PhaseSchedule",
    "Preset",
    "ScenarioConfig",
    "build_map",
    "generate",
    "generate_scene",
    "iter_scenes",
    "preset",
    "preset_names",
]
