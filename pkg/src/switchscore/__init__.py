"""Code-switching ASR scoring and training-objective toolkit.

Measures WER, MER (mixed-granularity units) and PIER (errors restricted
to embedded-language points of interest) over script-aware tokenized
transcripts, builds per-token loss weight tables, computes the weighted
cross-entropy objective with analytic gradients, and runs a small
deterministic trainer demonstrating the effect of embedded-token
weighting.
"""

__version__ = "0.1.0"

from .errors import (
    InvalidInputError,
    SwitchScoreError,
    TrainingFailureError,
    TranscriptParseError,
    UndefinedMetricError,
)
from .tokenizer import (
    DEFAULT_NORMALIZATION,
    NormalizationOptions,
    ScriptClass,
    Token,
    Utterance,
    classify_script,
    normalize,
    segment_units,
    segment_words,
)
from .align import Alignment, EditOp, EditOpKind, align
from .metrics import (
    BreakdownReport,
    EvalConfig,
    MetricCounts,
    PoiSet,
    aggregate_corpus,
    error_breakdown,
    filter_ops_at_poi,
    is_hallucination,
    mixed_error_rate,
    pier,
    points_of_interest,
    relative_improvement,
    word_error_rate,
)
from .loss import (
    BatchTargets,
    MultitaskLoss,
    Vocabulary,
    WeightTable,
    build_weight_table,
    grad_weighted_ce,
    log_softmax,
    lookup_weights,
    multitask_loss,
    pad_batch,
    standard_ce,
    weighted_ce,
)
from .trainer import (
    SyntheticCorpusSpec,
    ToyCorpus,
    ToyEvaluation,
    ToyModel,
    ToyUtterance,
    TrainConfig,
    TrainReport,
    evaluate_toy,
    generate_corpus,
    toy_vocabulary,
    train,
)
from .textio import TranscriptPair, read_transcripts

__all__ = [
    "__version__",
    "SwitchScoreError",
    "InvalidInputError",
    "UndefinedMetricError",
    "TranscriptParseError",
    "TrainingFailureError",
    "ScriptClass",
    "Token",
    "Utterance",
    "NormalizationOptions",
    "DEFAULT_NORMALIZATION",
    "classify_script",
    "normalize",
    "segment_units",
    "segment_words",
    "EditOpKind",
    "EditOp",
    "Alignment",
    "align",
    "MetricCounts",
    "PoiSet",
    "EvalConfig",
    "BreakdownReport",
    "word_error_rate",
    "points_of_interest",
    "filter_ops_at_poi",
    "pier",
    "mixed_error_rate",
    "is_hallucination",
    "aggregate_corpus",
    "error_breakdown",
    "relative_improvement",
    "Vocabulary",
    "WeightTable",
    "BatchTargets",
    "MultitaskLoss",
    "pad_batch",
    "build_weight_table",
    "lookup_weights",
    "log_softmax",
    "standard_ce",
    "weighted_ce",
    "grad_weighted_ce",
    "multitask_loss",
    "SyntheticCorpusSpec",
    "ToyUtterance",
    "ToyCorpus",
    "ToyModel",
    "TrainConfig",
    "TrainReport",
    "ToyEvaluation",
    "toy_vocabulary",
    "generate_corpus",
    "train",
    "evaluate_toy",
    "TranscriptPair",
    "read_transcripts",
]
