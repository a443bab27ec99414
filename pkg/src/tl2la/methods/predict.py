"""Turning merged evidence into assignment predictions.

Every method answers with 1 (assigned) when it has nothing to go on: a
missed assignment is the dangerous error, an extra one only costs a stop.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional

from ..model import PairKey, RoadMap
from ..stats import upper_tail_pvalue
from .evidence import EvidenceStore, PairEvidence, RejectionConfig


class Method(Enum):
    BASELINE = "baseline"
    PATTERN = "pattern"
    REJECTION = "rejection"


class MissingPrior(ValueError):
    pass


@dataclass(frozen=True)
class AssignmentPrediction:
    light_id: str
    lane_id: str
    label: int
    confidence: float
    method: Method
    evidence_count: int

    @property
    def pair(self) -> PairKey:
        return (self.light_id, self.lane_id)

    def to_record(self) -> dict:
        return {
            "light_id": self.light_id,
            "lane_id": self.lane_id,
            "label": self.label,
            "confidence": self.confidence,
            "method": self.method.value,
            "evidence_count": self.evidence_count,
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "AssignmentPrediction":
        return cls(
            str(record["light_id"]),
            str(record["lane_id"]),
            int(record["label"]),
            float(record["confidence"]),
            Method(record["method"]),
            int(record["evidence_count"]),
        )


def _universe(store: EvidenceStore, pairs: Optional[Iterable[PairKey]]) -> list[PairKey]:
    # an explicit pair set (the co-observed pairs) is the prediction universe
    return sorted(set(store.pairs) if pairs is None else set(pairs))


def predict_baseline(
    store: EvidenceStore,
    road_map: Optional[RoadMap] = None,
    prior: Optional[tuple[int, int]] = None,
    pairs: Optional[Iterable[PairKey]] = None,
) -> list[AssignmentPrediction]:
    """Label every pair with the majority class of the prior (n_negative, n_positive).

    Without an explicit prior the class counts come from the map's labels of
    the co-observed pairs. A tie goes to 1.
    """
    keys = _universe(store, pairs)
    if prior is None:
        truth = road_map.ground_truth if road_map is not None else None
        if not truth:
            raise MissingPrior("baseline needs ground-truth labels or an explicit prior")
        labelled = [truth[k] for k in keys if k in truth] or list(truth.values())
        prior = (labelled.count(0), labelled.count(1))
    n0, n1 = prior
    if n0 + n1 == 0:
        raise MissingPrior("prior has no observations")
    label = 1 if n1 >= n0 else 0
    fraction = (n1 if label else n0) / (n0 + n1)
    return [
        AssignmentPrediction(
            light, lane, label, fraction, Method.BASELINE,
            store.pairs[(light, lane)].scenes if (light, lane) in store.pairs else 0,
        )
        for light, lane in keys
    ]


def predict_pattern(
    store: EvidenceStore,
    pairs: Optional[Iterable[PairKey]] = None,
    global_sum: bool = False,
) -> list[AssignmentPrediction]:
    """Majority of per-scene votes; confidence is the normalised vote margin.

    With ``global_sum`` the label is instead the sign of all contributions
    summed over the corpus.
    """
    out = []
    for light, lane in _universe(store, pairs):
        ev = store.pairs.get((light, lane), PairEvidence())
        total = ev.scenes
        margin = abs(ev.votes_assign - ev.votes_reject) / total if total else 0.0
        if total == 0:
            label = 1
        elif global_sum:
            label = int(ev.contribution > 0)
        else:
            label = int(ev.votes_assign >= ev.votes_reject)
        out.append(AssignmentPrediction(light, lane, label, margin, Method.PATTERN, total))
    return out


def predict_rejection(
    store: EvidenceStore,
    cfg: RejectionConfig = RejectionConfig(),
    pairs: Optional[Iterable[PairKey]] = None,
) -> list[AssignmentPrediction]:
    """Reject the assignment when red passes are significantly more frequent than ``cfg.p``."""
    out = []
    for light, lane in _universe(store, pairs):
        ev = store.pairs.get((light, lane), PairEvidence())
        pvalue = upper_tail_pvalue(ev.red_passes, ev.passes, cfg.p) if ev.passes else 1.0
        label = 0 if pvalue < cfg.alpha else 1
        out.append(AssignmentPrediction(light, lane, label, pvalue, Method.REJECTION, ev.pass_scenes))
    return out


def predict(
    method: Method | str,
    store: EvidenceStore,
    road_map: Optional[RoadMap] = None,
    rejection: RejectionConfig = RejectionConfig(),
    prior: Optional[tuple[int, int]] = None,
    pairs: Optional[Iterable[PairKey]] = None,
    global_sum: bool = False,
) -> list[AssignmentPrediction]:
    method = Method(method)
    if method is Method.BASELINE:
        return predict_baseline(store, road_map, prior, pairs)
    if method is Method.PATTERN:
        return predict_pattern(store, pairs, global_sum)
    return predict_rejection(store, rejection, pairs)
