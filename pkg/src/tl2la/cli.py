"""Command-line front end: simulate, transform, predict, evaluate, saturation, presets.

Every command writes its outputs into ``--out`` together with
``<command>.manifest.json``. Exit status: 0 success, 1 invalid input or
configuration (first problem on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .evaluation import (
    UnknownPair,
    pair_rows,
    report_record,
    saturation_curve,
    score,
    write_json,
    write_pair_table,
    write_saturation_table,
)
from .geometry import AmbiguousMatch, polyline_length
from .io import FormatError, iter_scene_file, read_map, read_predictions, write_map, write_predictions, write_scenes
from .methods import HeuristicConfig, Method, MissingPrior, RejectionConfig, extract_corpus, predict
from .methods.evidence import SCOPES, default_workers
from .model import validate_map, validate_scene
from .simulator import ConfigError, ScenarioConfig, build_map, iter_scenes, preset, preset_names
from .stats import DomainError
from .transform import TopologyError, build_lane_sequences, co_observed_pairs, corpus_stats, proximity_filter


class InputError(Exception):
    """Invalid input data or configuration; reported with exit status 1."""


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_digest: str
    seed: Optional[int]
    inputs: dict
    outputs: dict
    version: str
    wall_time: float

    def write(self, out_dir: Path) -> Path:
        path = out_dir / f"{self.command}.manifest.json"
        with open(path, "w", encoding="utf-8") as stream:
            write_json(asdict(self), stream)
        return path


def digest(record) -> str:
    text = json.dumps(record, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


# ---- helpers -----------------------------------------------------------------

def _load_json(path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object")
    return data


def _checked_map(path):
    road_map = read_map(path)
    problems = validate_map(road_map)
    if problems:
        raise InputError(f"{path}: {problems[0]}")
    return road_map


def _checked_scenes(path, road_map):
    for scene in iter_scene_file(path):
        problems = validate_scene(scene, road_map)
        if problems:
            raise InputError(f"{path}: {problems[0]}")
        yield scene


def _thresholds(args) -> tuple[HeuristicConfig, RejectionConfig]:
    """Defaults, then the --config file, then individual flags."""
    file_cfg = _load_json(args.config) if args.config else {}
    unknown = set(file_cfg) - {"heuristic", "rejection"}
    if unknown:
        raise InputError(f"{args.config}: unknown sections {sorted(unknown)}")
    try:
        heuristic = HeuristicConfig(**file_cfg.get("heuristic", {}))
        rejection = RejectionConfig(**file_cfg.get("rejection", {}))
        h_over = {f.name: getattr(args, f.name) for f in fields(HeuristicConfig)
                  if getattr(args, f.name, None) is not None}
        r_over = {f.name: getattr(args, f.name) for f in fields(RejectionConfig)
                  if getattr(args, f.name, None) is not None}
        return replace(heuristic, **h_over), replace(rejection, **r_over)
    except (TypeError, ValueError) as exc:
        raise InputError(f"threshold configuration: {exc}") from exc


def _prior(text: Optional[str]) -> Optional[tuple[int, int]]:
    if text is None:
        return None
    try:
        n0, n1 = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise InputError(f"--prior expects N0,N1, got {text!r}") from exc
    return n0, n1


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def _print_table(rows: list[dict], stream=None) -> None:
    stream = stream or sys.stdout
    if not rows:
        stream.write("(no rows)\n")
        return
    cols = list(rows[0])
    cells = [[_fmt(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    stream.write("  ".join(c.ljust(w) for c, w in zip(cols, widths)) + "\n")
    for row in cells:
        stream.write("  ".join(v.ljust(w) for v, w in zip(row, widths)) + "\n")


def _emit(rows: list[dict], fmt: str) -> None:
    if fmt == "ndjson":
        for r in rows:
            sys.stdout.write(json.dumps(r, separators=(",", ":")) + "\n")
    else:
        _print_table(rows)


# ---- commands ----------------------------------------------------------------

def _scenario(args) -> ScenarioConfig:
    try:
        if args.config:
            cfg = ScenarioConfig.from_dict(_load_json(args.config))
        else:
            cfg = preset(args.preset)
        changes = {}
        if args.seed is not None:
            changes["seed"] = args.seed
        if args.scenes is not None:
            changes["scene_count"] = args.scenes
        for name in ("compliance_rate", "detection_noise", "arrival_rate", "right_turn_on_red_rate"):
            if getattr(args, name) is not None:
                changes[name] = getattr(args, name)
        if args.ego_driver:
            changes["ego_driver"] = True
        return cfg.with_(**changes)
    except ConfigError as exc:
        raise InputError(f"scenario configuration: {exc}") from exc


def cmd_simulate(args) -> dict:
    cfg = _scenario(args)
    out = _out_dir(args)
    map_path, scenes_path = out / "map.json", out / "scenes.ndjson"
    write_map(build_map(cfg), map_path)
    with open(scenes_path, "w", encoding="utf-8") as stream:
        count = write_scenes(iter_scenes(cfg), stream)
    (out / "scenario.json").write_text(json.dumps(cfg.to_dict(), indent=1, sort_keys=True) + "\n")
    _emit([{"scenes": count, "map": str(map_path), "scenes_file": str(scenes_path)}], args.format)
    return {"digest": cfg.digest(), "seed": cfg.seed, "inputs": {"config": args.config, "preset": args.preset},
            "outputs": {"map": str(map_path), "scenes": str(scenes_path), "scenario": str(out / "scenario.json")}}


def cmd_transform(args) -> dict:
    road_map = _checked_map(args.map)
    out = _out_dir(args)
    try:
        sequences = build_lane_sequences(road_map, args.depth)
    except TopologyError as exc:
        raise InputError(f"{args.map}: {exc}") from exc
    lanes_path, scenes_path = out / "lanes.json", out / "prepared.ndjson"
    write_map(sequences, lanes_path)
    count, duration = 0, 0.0
    with open(scenes_path, "w", encoding="utf-8") as stream:
        for scene in _checked_scenes(args.scenes, road_map):
            write_scenes([proximity_filter(scene, sequences, args.max_distance)], stream)
            count += 1
            ego = scene.ego
            duration += float(ego.timestamps[-1] - ego.timestamps[0]) + scene.sample_period
    roadway_km = args.roadway_km or sum(polyline_length(l.centerline) for l in sequences.lanes) / 1000.0
    summary = {"scenes": count, "lanes": len(sequences.lanes)}
    if count:
        stats = corpus_stats(count, duration / count, roadway_km)
        summary.update(asdict(stats))
    with open(out / "stats.json", "w", encoding="utf-8") as stream:
        write_json(summary, stream)
    _emit([summary], args.format)
    return {"digest": digest({"depth": args.depth, "max_distance": args.max_distance}), "seed": None,
            "inputs": {"map": args.map, "scenes": args.scenes},
            "outputs": {"map": str(lanes_path), "scenes": str(scenes_path), "stats": str(out / "stats.json")}}


def cmd_predict(args) -> dict:
    road_map = _checked_map(args.map)
    heuristic, rejection = _thresholds(args)
    heuristic = replace(heuristic, cumulative=args.cumulative or heuristic.cumulative)
    prior = _prior(args.prior)
    scenes = list(_checked_scenes(args.scenes, road_map))
    store = extract_corpus(scenes, road_map, heuristic, rejection, args.scope, args.smooth,
                           workers=args.workers or default_workers())
    pairs = co_observed_pairs(scenes, road_map)
    try:
        predictions = predict(args.method, store, road_map, rejection, prior, pairs, args.global_sum)
    except MissingPrior as exc:
        raise InputError(str(exc)) from exc
    out = _out_dir(args)
    path = out / "predictions.ndjson"
    with open(path, "w", encoding="utf-8") as stream:
        write_predictions(predictions, stream)
    _emit([p.to_record() for p in predictions], args.format)
    settings = {"method": args.method, "scope": args.scope, "heuristic": asdict(heuristic),
                "rejection": asdict(rejection), "prior": prior, "global_sum": args.global_sum,
                "smooth": args.smooth}
    return {"digest": digest(settings), "seed": None, "inputs": {"map": args.map, "scenes": args.scenes},
            "outputs": {"predictions": str(path)}}


def cmd_evaluate(args) -> dict:
    road_map = _checked_map(args.map)
    if not road_map.ground_truth:
        raise InputError(f"{args.map}: map carries no ground truth")
    predictions = read_predictions(args.predictions)
    try:
        metrics = score(predictions, road_map.ground_truth, args.exclude_default)
        rows = pair_rows(predictions, road_map.ground_truth)
    except UnknownPair as exc:
        raise InputError(str(exc.args[0])) from exc
    methods = sorted({p.method.value for p in predictions})
    record = report_record(metrics, ",".join(methods) or None, len(predictions), args.exclude_default)
    out = _out_dir(args)
    with open(out / "report.json", "w", encoding="utf-8") as stream:
        write_json(record, stream)
    with open(out / "pairs.csv", "w", encoding="utf-8") as stream:
        write_pair_table(rows, stream)
    _emit([record], args.format)
    return {"digest": digest({"exclude_default": args.exclude_default}), "seed": None,
            "inputs": {"map": args.map, "predictions": args.predictions},
            "outputs": {"report": str(out / "report.json"), "pairs": str(out / "pairs.csv")}}


def cmd_saturation(args) -> dict:
    road_map = _checked_map(args.map)
    heuristic, rejection = _thresholds(args)
    try:
        checkpoints = [int(x) for x in args.checkpoints.split(",")]
    except ValueError as exc:
        raise InputError(f"--checkpoints expects comma-separated integers, got {args.checkpoints!r}") from exc
    try:
        series = saturation_curve(_checked_scenes(args.scenes, road_map), road_map, args.method, checkpoints,
                                  heuristic, rejection, args.scope, _prior(args.prior))
    except (ValueError, MissingPrior) as exc:
        raise InputError(str(exc)) from exc
    out = _out_dir(args)
    with open(out / "saturation.csv", "w", encoding="utf-8") as stream:
        write_saturation_table(series, stream)
    _emit([p.to_row() for p in series.points], args.format)
    settings = {"method": args.method, "scope": args.scope, "checkpoints": checkpoints,
                "heuristic": asdict(heuristic), "rejection": asdict(rejection)}
    return {"digest": digest(settings), "seed": None, "inputs": {"map": args.map, "scenes": args.scenes},
            "outputs": {"saturation": str(out / "saturation.csv")}}


def cmd_presets(args) -> dict:
    rows = [{"name": name, "config": preset(name).to_dict()} for name in preset_names()]
    if args.format == "ndjson":
        _emit(rows, "ndjson")
    else:
        _print_table([{"name": r["name"], "digest": preset(r["name"]).digest()[:12]} for r in rows])
    out = None
    outputs = {}
    if args.out:
        out = _out_dir(args)
        with open(out / "presets.json", "w", encoding="utf-8") as stream:
            write_json(rows, stream)
        outputs["presets"] = str(out / "presets.json")
    return {"digest": digest([r["config"] for r in rows]), "seed": None, "inputs": {}, "outputs": outputs,
            "out_dir": out}


# ---- parser ------------------------------------------------------------------

def _add_thresholds(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with 'heuristic' and 'rejection' sections")
    g = p.add_argument_group("heuristic thresholds")
    g.add_argument("--stop-zone", dest="stop_zone", type=float)
    g.add_argument("--slow-zone", dest="slow_zone", type=float)
    g.add_argument("--reaction-time-red", dest="reaction_time_red", type=float)
    g.add_argument("--reaction-time-green", dest="reaction_time_green", type=float)
    g.add_argument("--vel-threshold", dest="vel_threshold", type=float)
    g.add_argument("--acc-threshold", dest="acc_threshold", type=float)
    r = p.add_argument_group("rejection test")
    r.add_argument("--pass-distance", dest="pass_distance", type=float)
    r.add_argument("--pass-speed", dest="pass_speed", type=float, help="km/h")
    r.add_argument("--right-turn-pass-speed", dest="right_turn_pass_speed", type=float, help="km/h")
    r.add_argument("--null-p", dest="p", type=float, help="red-pass probability under the null hypothesis")
    r.add_argument("--alpha", dest="alpha", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tl2la", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"tl2la {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--out", required=out_required, help="output directory")
        p.add_argument("--format", choices=("table", "ndjson"), default="table")

    p = sub.add_parser("simulate", help="generate a synthetic corpus")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=preset_names(), default="Basic4Way")
    src.add_argument("--config", help="scenario configuration JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--scenes", type=int)
    p.add_argument("--compliance-rate", dest="compliance_rate", type=float)
    p.add_argument("--detection-noise", dest="detection_noise", type=float)
    p.add_argument("--arrival-rate", dest="arrival_rate", type=float)
    p.add_argument("--right-turn-on-red-rate", dest="right_turn_on_red_rate", type=float)
    p.add_argument("--ego-driver", action="store_true")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("transform", help="build lane sequences and filter scenes")
    p.add_argument("--map", required=True)
    p.add_argument("--scenes", required=True)
    p.add_argument("--depth", type=float, default=20.0)
    p.add_argument("--max-distance", dest="max_distance", type=float, default=20.0)
    p.add_argument("--roadway-km", dest="roadway_km", type=float,
                   help="distinct roadway length for the density statistic (default: sequence lengths)")
    common(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("predict", help="derive assignments from a prepared corpus")
    p.add_argument("--map", required=True)
    p.add_argument("--scenes", required=True)
    p.add_argument("--method", choices=[m.value for m in Method], required=True)
    p.add_argument("--scope", choices=SCOPES, default="all")
    p.add_argument("--prior", help="baseline class counts N0,N1 instead of ground truth")
    p.add_argument("--global-sum", dest="global_sum", action="store_true",
                   help="pattern: sign of the corpus-wide sum instead of scene votes")
    p.add_argument("--cumulative", action="store_true", help="sum every matching heuristic row")
    p.add_argument("--smooth", action="store_true", help="3-sample median filter before differentiation")
    p.add_argument("--workers", type=int, help="worker processes (default: available CPUs)")
    _add_thresholds(p)
    common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against the map's ground truth")
    p.add_argument("--map", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--exclude-default", dest="exclude_default", action="store_true",
                   help="skip pairs labelled without evidence")
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("saturation", help="metrics over growing corpus prefixes")
    p.add_argument("--map", required=True)
    p.add_argument("--scenes", required=True)
    p.add_argument("--method", choices=[m.value for m in Method], required=True)
    p.add_argument("--scope", choices=SCOPES, default="all")
    p.add_argument("--checkpoints", default="10,50,250,1250")
    p.add_argument("--prior")
    _add_thresholds(p)
    common(p)
    p.set_defaults(func=cmd_saturation)

    p = sub.add_parser("presets", help="list the built-in scenarios")
    common(p, out_required=False)
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    started = time.perf_counter()
    try:
        info = args.func(args)
    except (InputError, FormatError, ConfigError, DomainError, TopologyError, AmbiguousMatch, OSError) as exc:
        print(f"tl2la {args.command}: {exc}", file=sys.stderr)
        return 1
    out_dir = info.pop("out_dir", None) if args.command == "presets" else Path(args.out)
    if out_dir is not None:
        RunManifest(
            command=args.command,
            config_digest=info["digest"],
            seed=info["seed"],
            inputs=info["inputs"],
            outputs=info["outputs"],
            version=__version__,
            wall_time=round(time.perf_counter() - started, 6),
        ).write(out_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
