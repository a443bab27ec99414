"""Scoring predictions against ground truth and the saturation analysis."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from typing import IO, Iterable, Mapping, Optional, Sequence

from .methods.evidence import EvidenceStore, RejectionConfig, EvidenceAccumulator, extract_scene_evidence
from .methods.heuristic import HeuristicConfig
from .methods.predict import AssignmentPrediction, Method, predict
from .model import PairKey, RoadMap, Scene
from .transform import scene_pairs


class UnknownPair(KeyError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


@dataclass(frozen=True)
class Metrics:
    """Standard ratios; None where the denominator is zero."""

    counts: ConfusionCounts
    accuracy: Optional[float]
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]

    @classmethod
    def from_counts(cls, c: ConfusionCounts) -> "Metrics":
        return cls(
            c,
            _ratio(c.tp + c.tn, c.total),
            _ratio(c.tp, c.tp + c.fp),
            _ratio(c.tp, c.tp + c.fn),
            _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn),
        )

    def to_record(self) -> dict:
        return {**asdict(self.counts), "accuracy": self.accuracy, "precision": self.precision,
                "recall": self.recall, "f1": self.f1}


def score(
    predictions: Iterable[AssignmentPrediction],
    ground_truth: Mapping[PairKey, int],
    exclude_default: bool = False,
) -> Metrics:
    """Confusion counts and ratios over the predicted pairs.

    With ``exclude_default`` pairs labelled without any evidence are skipped.
    """
    tp = fp = tn = fn = 0
    for p in predictions:
        if p.pair not in ground_truth:
            raise UnknownPair(f"no ground-truth label for {p.pair}")
        if exclude_default and p.evidence_count == 0:
            continue
        truth = ground_truth[p.pair]
        if p.label == 1:
            tp += truth == 1
            fp += truth == 0
        else:
            fn += truth == 1
            tn += truth == 0
    return Metrics.from_counts(ConfusionCounts(tp, fp, tn, fn))


@dataclass(frozen=True)
class PairRow:
    light_id: str
    lane_id: str
    truth: int
    prediction: int
    confidence: float
    evidence_count: int

    @property
    def correct(self) -> bool:
        return self.truth == self.prediction


def pair_rows(predictions: Iterable[AssignmentPrediction], ground_truth: Mapping[PairKey, int]) -> list[PairRow]:
    rows = []
    for p in sorted(predictions, key=lambda p: p.pair):
        if p.pair not in ground_truth:
            raise UnknownPair(f"no ground-truth label for {p.pair}")
        rows.append(PairRow(p.light_id, p.lane_id, ground_truth[p.pair], p.label, p.confidence, p.evidence_count))
    return rows


def write_pair_table(rows: Iterable[PairRow], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["light_id", "lane_id", "truth", "prediction", "confidence", "evidence_count", "correct"])
    for r in rows:
        writer.writerow([r.light_id, r.lane_id, r.truth, r.prediction, repr(r.confidence),
                         r.evidence_count, int(r.correct)])


def report_record(metrics: Metrics, method: Optional[str], pair_count: int, exclude_default: bool) -> dict:
    return {"method": method, "pairs": pair_count, "exclude_default": exclude_default, **metrics.to_record()}


@dataclass(frozen=True)
class SaturationPoint:
    scene_count: int
    metrics: Metrics
    classified_pair_count: int
    # predictions for every co-observed pair of the prefix
    predictions: tuple[AssignmentPrediction, ...]

    def to_row(self) -> dict:
        m = self.metrics
        return {"scene_count": self.scene_count, "accuracy": m.accuracy, "precision": m.precision,
                "recall": m.recall, "f1": m.f1, "classified_pair_count": self.classified_pair_count}


@dataclass(frozen=True)
class SaturationSeries:
    method: Method
    points: tuple[SaturationPoint, ...]


def saturation_curve(
    scenes: Iterable[Scene],
    road_map: RoadMap,
    method: Method | str,
    checkpoints: Sequence[int],
    heuristic: HeuristicConfig = HeuristicConfig(),
    rejection: RejectionConfig = RejectionConfig(),
    scope: str = "all",
    prior: Optional[tuple[int, int]] = None,
) -> SaturationSeries:
    """Evaluate the method on growing scene prefixes in one streaming pass.

    Each point scores only the pairs classifiable at that prefix: co-observed
    pairs the method labels from evidence (evidence_count > 0).
    """
    method = Method(method)
    checkpoints = list(checkpoints)
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])) or (checkpoints and checkpoints[0] <= 0):
        raise ValueError("checkpoints must be positive and strictly increasing")
    truth = road_map.ground_truth or {}
    acc = EvidenceAccumulator()
    pairs: set[PairKey] = set()
    points = []
    pending = iter(checkpoints)
    target = next(pending, None)
    seen = 0
    for scene in scenes:
        if target is None:
            break
        acc.add_store(extract_scene_evidence(scene, road_map, heuristic, rejection, scope))
        pairs |= scene_pairs(scene, road_map)
        seen += 1
        if seen == target:
            points.append(_point(seen, acc.freeze(), pairs, road_map, method, rejection, prior, truth))
            target = next(pending, None)
    if target is not None:
        raise ValueError(f"corpus has {seen} scenes, fewer than checkpoint {target}")
    return SaturationSeries(method, tuple(points))


def _point(count, store: EvidenceStore, pairs, road_map, method, rejection, prior, truth) -> SaturationPoint:
    preds = tuple(predict(method, store, road_map, rejection, prior, pairs))
    classified = [p for p in preds if p.evidence_count > 0]
    return SaturationPoint(count, score(classified, truth), len(classified), preds)


def write_saturation_table(series: SaturationSeries, stream: IO[str]) -> None:
    fields = ["scene_count", "accuracy", "precision", "recall", "f1", "classified_pair_count"]
    writer = csv.DictWriter(stream, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for point in series.points:
        writer.writerow({k: ("" if v is None else v) for k, v in point.to_row().items()})


def write_json(record, stream: IO[str]) -> None:
    stream.write(json.dumps(record, indent=1, sort_keys=True) + "\n")
