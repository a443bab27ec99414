import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tl2la.methods import (
    AssignmentPrediction,
    EvidenceStore,
    Method,
    MissingPrior,
    PairEvidence,
    RejectionConfig,
    predict,
    predict_baseline,
    predict_pattern,
    predict_rejection,
)
from tl2la.model import RoadMap


def _store(**pairs):
    return EvidenceStore({("s", lane): ev for lane, ev in sorted(pairs.items())})


def _only(predictions):
    (p,) = predictions
    return p


def test_pattern_majority_and_margin():
    p = _only(predict_pattern(_store(a=PairEvidence(votes_assign=7, votes_reject=3))))
    assert (p.label, p.confidence, p.evidence_count, p.method) == (1, pytest.approx(0.4), 10, Method.PATTERN)
    assert _only(predict_pattern(_store(a=PairEvidence(votes_assign=3, votes_reject=7)))).label == 0


def test_pattern_defaults_and_ties():
    assert _only(predict_pattern(EvidenceStore(), pairs=[("s", "a")])).label == 1
    tie = _only(predict_pattern(_store(a=PairEvidence(votes_assign=5, votes_reject=5))))
    assert (tie.label, tie.confidence) == (1, 0.0)


def test_pattern_global_sum_variant():
    ev = PairEvidence(contribution=-10, votes_assign=6, votes_reject=4)
    assert _only(predict_pattern(_store(a=ev))).label == 1
    assert _only(predict_pattern(_store(a=ev), global_sum=True)).label == 0


def test_baseline_majority_over_labelled_pairs():
    keys = [("s", f"l{i}") for i in range(271)]
    truth = {k: int(i < 180) for i, k in enumerate(keys)}
    road_map = RoadMap((), (), truth)
    preds = predict_baseline(EvidenceStore(), road_map, pairs=keys)
    assert len(preds) == 271 and {p.label for p in preds} == {1}
    assert preds[0].confidence == pytest.approx(180 / 271)


def test_baseline_prior():
    keys = [("s", "a"), ("s", "b")]
    assert {p.label for p in predict_baseline(EvidenceStore(), prior=(4, 4), pairs=keys)} == {1}
    assert {p.label for p in predict_baseline(EvidenceStore(), prior=(10, 2), pairs=keys)} == {0}


def test_baseline_without_labels():
    with pytest.raises(MissingPrior):
        predict_baseline(EvidenceStore(), RoadMap((), ()), pairs=[("s", "a")])
    with pytest.raises(MissingPrior):
        predict_baseline(EvidenceStore(), prior=(0, 0), pairs=[("s", "a")])


def test_rejection_reference_values():
    store = _store(a=PairEvidence(), b=PairEvidence(passes=200, red_passes=40, pass_scenes=9),
                   c=PairEvidence(passes=20, red_passes=2, pass_scenes=3))
    a, b, c = predict_rejection(store)
    assert (a.label, a.confidence, a.evidence_count) == (1, 1.0, 0)
    assert b.label == 0 and b.confidence < 1e-12 and b.evidence_count == 9
    assert c.label == 1 and c.confidence == pytest.approx(0.264, abs=5e-4)


def test_rejection_alpha_is_configurable():
    store = _store(c=PairEvidence(passes=20, red_passes=2))
    assert _only(predict_rejection(store, RejectionConfig(alpha=0.5))).label == 0


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 5000))
def test_green_passes_never_reject(n):
    assert _only(predict_rejection(_store(a=PairEvidence(passes=n)))).label == 1


def test_more_passes_more_confidence():
    values = [
        _only(predict_rejection(_store(a=PairEvidence(passes=n, red_passes=n // 5)))).confidence
        for n in (10, 50, 250)
    ]
    assert values[0] >= values[1] >= values[2]


def test_explicit_pairs_are_the_universe():
    store = _store(a=PairEvidence(passes=100, red_passes=90), z=PairEvidence(passes=1))
    preds = predict_rejection(store, pairs=[("s", "a"), ("s", "q")])
    assert [(p.lane_id, p.label) for p in preds] == [("a", 0), ("q", 1)]


def test_dispatch_and_record_round_trip():
    store = _store(a=PairEvidence(votes_assign=1, passes=3, red_passes=1, pass_scenes=1))
    for method in Method:
        preds = predict(method, store, RoadMap((), (), {("s", "a"): 1}))
        assert [p.method for p in preds] == [method]
        assert [AssignmentPrediction.from_record(p.to_record()) for p in preds] == preds
