from .evidence import (
    EvidenceStore,
    PairEvidence,
    RejectionConfig,
    extract_corpus,
    extract_scene_evidence,
)
from .heuristic import ContextSnapshot, HeuristicConfig, Pattern, heuristic_contribution
from .predict import (
    AssignmentPrediction,
    Method,
    MissingPrior,
    predict,
    predict_baseline,
    predict_pattern,
    predict_rejection,
)

__all__ = [
    "AssignmentPrediction",
    "ContextSnapshot",
    "EvidenceStore",
    "HeuristicConfig",
    "Method",
    "MissingPrior",
    "PairEvidence",
    "Pattern",
    "RejectionConfig",
    "extract_corpus",
    "extract_scene_evidence",
    "heuristic_contribution",
    "predict",
    "predict_baseline",
    "predict_pattern",
    "predict_rejection",
]
