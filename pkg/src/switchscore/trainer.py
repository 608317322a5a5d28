"""Deterministic toy trainer for the embedded-token weighting experiment.

The task is per-position token classification from synthetic feature
vectors. A two-state switch process picks each token's language: the
next token is embedded with probability ``switch_probability`` from
either state, so the chain's stationary embedded mass equals that
probability exactly and embedded tokens are the minority whenever it is
below one half.

Every token id has a feature prototype. Matrix token j sits on its own
axis; embedded token k sits halfway between its own axis and matrix
token (k mod matrix_vocab_size)'s axis, making each embedded token
acoustically confusable with one matrix token. Gaussian noise of scale
``feature_noise`` is added per emission. With class-imbalanced data the
learned boundary favors the matrix side of each confusable pair;
up-weighting embedded tokens in the loss moves it back.

Training is full-batch gradient descent from all-zero weights, so runs
are bit-reproducible: identical (spec, config) pairs give identical
reports. Per-script error counts in reports are positional (decode is
per position, so mismatch counting needs no alignment); the PIER proxy
is computed through the real tokenizer/alignment/metric pipeline on the
decoded surfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .align import align
from .errors import InvalidInputError, TrainingFailureError, UndefinedMetricError
from .loss import (
    Vocabulary,
    build_weight_table,
    grad_weighted_ce,
    weighted_ce,
)
from .metrics import (
    EvalConfig,
    MetricCounts,
    aggregate_corpus,
    pier,
    points_of_interest,
)
from .tokenizer import ScriptClass, Token

OBJECTIVES = ("standard", "weighted", "multitask")

# Fraction of an embedded token's prototype shared with its paired
# matrix token; the rest stays on the embedded token's own axis.
CONFUSION_MIX = 0.4

EVAL_FRACTION = 0.2


@dataclass(frozen=True)
class SyntheticCorpusSpec:
    matrix_vocab_size: int = 8
    embedded_vocab_size: int = 3
    switch_probability: float = 0.15
    utterance_length_range: tuple[int, int] = (4, 12)
    num_utterances: int = 600
    feature_noise: float = 0.35
    seed: int = 2024

    def __post_init__(self):
        if self.matrix_vocab_size < 1 or self.embedded_vocab_size < 1:
            raise InvalidInputError("vocabulary sizes must be at least 1")
        lo, hi = self.utterance_length_range
        if lo < 1 or lo > hi:
            raise InvalidInputError("utterance length range must satisfy 1 <= min <= max")
        if self.num_utterances < 1:
            raise InvalidInputError("need at least one utterance")
        if not 0.0 <= self.switch_probability <= 1.0:
            raise InvalidInputError("switch probability must lie in [0, 1]")
        if self.feature_noise < 0:
            raise InvalidInputError("feature noise must be non-negative")

    @property
    def vocab_size(self) -> int:
        return self.matrix_vocab_size + self.embedded_vocab_size

    @property
    def stationary_embedded_mass(self) -> float:
        """Long-run fraction of embedded tokens under the switch process."""
        return self.switch_probability


@dataclass(frozen=True)
class ToyUtterance:
    token_ids: tuple[int, ...]
    features: np.ndarray  # float64 [len, F]


@dataclass(frozen=True)
class ToyCorpus:
    spec: SyntheticCorpusSpec
    vocab: Vocabulary
    utterances: tuple[ToyUtterance, ...]

    @property
    def train_split(self) -> tuple[ToyUtterance, ...]:
        if len(self.utterances) == 1:
            return self.utterances
        return self.utterances[: self._eval_start()]

    @property
    def eval_split(self) -> tuple[ToyUtterance, ...]:
        return self.utterances[self._eval_start() :]

    def _eval_start(self) -> int:
        n = len(self.utterances)
        if n == 1:
            # Degenerate corpus: train and eval share the one utterance.
            return 0
        return max(1, (n * 4) // 5)

    def is_embedded_id(self, token_id: int) -> bool:
        return token_id >= self.spec.matrix_vocab_size


@dataclass(frozen=True)
class ToyModel:
    weights: np.ndarray  # float64 [F, V]
    bias: np.ndarray  # float64 [V]

    def logits(self, features: np.ndarray) -> np.ndarray:
        return features @ self.weights + self.bias

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Greedy per-position decode (argmax; ties break to the lowest id)."""
        return np.argmax(self.logits(features), axis=-1)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.45
    epochs: int = 130
    alpha: float = 1.0
    objective: str = "standard"
    seed: int = 2024

    def __post_init__(self):
        # Zero is allowed so a no-update run stays expressible.
        if self.learning_rate < 0 or not math.isfinite(self.learning_rate):
            raise InvalidInputError("learning rate must be finite and non-negative")
        if self.epochs < 1:
            raise InvalidInputError("epochs must be at least 1")
        if not self.alpha > 0:
            raise InvalidInputError("alpha must be positive")
        if self.objective not in OBJECTIVES:
            raise InvalidInputError(
                f"objective must be one of {OBJECTIVES}, got {self.objective!r}"
            )


@dataclass(frozen=True)
class ToyEvaluation:
    """Positional per-script counts plus the pipeline PIER proxy."""

    matrix_counts: MetricCounts
    embedded_counts: MetricCounts
    pier_counts: MetricCounts | None

    @property
    def matrix_error(self) -> float | None:
        return None if self.matrix_counts.n_ref == 0 else self.matrix_counts.rate

    @property
    def embedded_error(self) -> float | None:
        return None if self.embedded_counts.n_ref == 0 else self.embedded_counts.rate

    @property
    def pier_proxy(self) -> float | None:
        return None if self.pier_counts is None else self.pier_counts.rate


@dataclass(frozen=True)
class TrainReport:
    objective: str
    alpha: float
    seed: int
    loss_trace: tuple[float, ...]
    matrix_accuracy: float | None
    embedded_accuracy: float | None
    embedded_substitutions: int
    evaluation: ToyEvaluation


def toy_vocabulary(spec: SyntheticCorpusSpec) -> Vocabulary:
    """Surfaces with real scripts so the weight-table path applies as is.

    Matrix tokens are Arabic-script surfaces, embedded tokens Latin;
    digits are script-neutral and only disambiguate the ids.
    """
    matrix = [f"م{j}" for j in range(spec.matrix_vocab_size)]
    embedded = [f"en{k}" for k in range(spec.embedded_vocab_size)]
    return Vocabulary(surfaces=tuple(matrix + embedded))


def _prototypes(spec: SyntheticCorpusSpec) -> np.ndarray:
    v = spec.vocab_size
    protos = np.eye(v, dtype=np.float64)
    for k in range(spec.embedded_vocab_size):
        token_id = spec.matrix_vocab_size + k
        paired = k % spec.matrix_vocab_size
        protos[token_id] = 0.0
        protos[token_id, token_id] = 1.0 - CONFUSION_MIX
        protos[token_id, paired] = CONFUSION_MIX
    return protos


def generate_corpus(spec: SyntheticCorpusSpec) -> ToyCorpus:
    """Draw a corpus as a pure function of ``spec``, seed included."""
    rng = np.random.default_rng(spec.seed)
    protos = _prototypes(spec)
    lo, hi = spec.utterance_length_range
    utterances = []
    for _ in range(spec.num_utterances):
        length = int(rng.integers(lo, hi + 1))
        ids = []
        for _ in range(length):
            if rng.random() < spec.switch_probability:
                ids.append(spec.matrix_vocab_size + int(rng.integers(0, spec.embedded_vocab_size)))
            else:
                ids.append(int(rng.integers(0, spec.matrix_vocab_size)))
        features = protos[ids] + spec.feature_noise * rng.standard_normal(
            (length, spec.vocab_size)
        )
        utterances.append(ToyUtterance(token_ids=tuple(ids), features=features))
    return ToyCorpus(spec=spec, vocab=toy_vocabulary(spec), utterances=tuple(utterances))


def _stack_split(corpus: ToyCorpus, split: Sequence[ToyUtterance]):
    feats = np.concatenate([u.features for u in split], axis=0)
    targets = np.concatenate([np.asarray(u.token_ids, dtype=np.int64) for u in split])
    return feats, targets


def train(corpus: ToyCorpus, cfg: TrainConfig) -> tuple[ToyModel, TrainReport]:
    """Full-batch gradient descent on the configured objective.

    Deterministic: zero initialization and a fixed batch (the whole
    training split) leave nothing to run-order or RNG state. A non-finite
    loss or parameter aborts with the 1-based epoch index.
    """
    split = corpus.train_split
    if not split:
        raise InvalidInputError("corpus has no training utterances")
    feats, targets = _stack_split(corpus, split)
    n = targets.shape[0]
    v = corpus.spec.vocab_size

    ones = np.ones(n, dtype=np.float64)
    if cfg.objective == "weighted":
        table = build_weight_table(corpus.vocab, cfg.alpha)
        token_weights = table.weights[targets]
    else:
        token_weights = ones

    lang_targets = (targets >= corpus.spec.matrix_vocab_size).astype(np.int64)

    w = np.zeros((feats.shape[1], v), dtype=np.float64)
    b = np.zeros(v, dtype=np.float64)
    lang_w = np.zeros((feats.shape[1], 2), dtype=np.float64)
    lang_b = np.zeros(2, dtype=np.float64)

    trace = []
    for epoch in range(1, cfg.epochs + 1):
        logits = feats @ w + b
        loss = weighted_ce(logits, targets, token_weights)
        grad = grad_weighted_ce(logits, targets, token_weights)
        if cfg.objective == "multitask":
            lang_logits = feats @ lang_w + lang_b
            loss = loss + cfg.alpha * weighted_ce(lang_logits, lang_targets, ones)
            lang_grad = cfg.alpha * grad_weighted_ce(lang_logits, lang_targets, ones)
        if not math.isfinite(loss):
            raise TrainingFailureError("loss is not finite", epoch=epoch)
        trace.append(float(loss))
        w = w - cfg.learning_rate * (feats.T @ grad)
        b = b - cfg.learning_rate * grad.sum(axis=0)
        if cfg.objective == "multitask":
            lang_w = lang_w - cfg.learning_rate * (feats.T @ lang_grad)
            lang_b = lang_b - cfg.learning_rate * lang_grad.sum(axis=0)
            if not (np.isfinite(lang_w).all() and np.isfinite(lang_b).all()):
                raise TrainingFailureError(
                    "language head parameters are not finite", epoch=epoch
                )
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise TrainingFailureError("parameters are not finite", epoch=epoch)

    model = ToyModel(weights=w, bias=b)
    evaluation = evaluate_toy(model, corpus)
    return model, TrainReport(
        objective=cfg.objective,
        alpha=cfg.alpha,
        seed=cfg.seed,
        loss_trace=tuple(trace),
        matrix_accuracy=_accuracy(evaluation.matrix_counts),
        embedded_accuracy=_accuracy(evaluation.embedded_counts),
        embedded_substitutions=evaluation.embedded_counts.substitutions,
        evaluation=evaluation,
    )


def _accuracy(counts: MetricCounts) -> float | None:
    if counts.n_ref == 0:
        return None
    return 1.0 - counts.rate


def evaluate_toy(
    model: ToyModel,
    corpus: ToyCorpus,
    utterances: Sequence[ToyUtterance] | None = None,
) -> ToyEvaluation:
    """Score greedy decodes of the held-out split (or a given split).

    Per-script counts are positional mismatches: the decode emits one
    token per reference position, so substitution counting against the
    reference position's own script needs no alignment. The PIER proxy
    runs the decoded surfaces through the real alignment + POI pipeline
    and is pooled over utterances; it is None when no utterance has a
    point of interest.
    """
    if utterances is None:
        utterances = corpus.eval_split
    spec = corpus.spec
    cfg = EvalConfig()
    scripts = tuple(
        ScriptClass.ARABIC if i < spec.matrix_vocab_size else ScriptClass.LATIN
        for i in range(spec.vocab_size)
    )

    mat = [0, 0]  # substitutions, positions
    emb = [0, 0]
    pier_entries: list[MetricCounts | None] = []
    for utt in utterances:
        pred = model.predict(utt.features)
        for pos, (want, got) in enumerate(zip(utt.token_ids, pred)):
            slot = emb if corpus.is_embedded_id(want) else mat
            slot[1] += 1
            if int(got) != want:
                slot[0] += 1
        ref_tokens = tuple(
            Token(text=corpus.vocab.surface_of(t), script=scripts[t], index=i + 1)
            for i, t in enumerate(utt.token_ids)
        )
        hyp_tokens = tuple(
            Token(text=corpus.vocab.surface_of(int(t)), script=scripts[int(t)], index=i + 1)
            for i, t in enumerate(pred)
        )
        poi = points_of_interest(ref_tokens, cfg)
        if poi.n_poi == 0:
            pier_entries.append(None)
        else:
            pier_entries.append(pier(align(ref_tokens, hyp_tokens), poi))

    try:
        pier_counts = aggregate_corpus(pier_entries)
    except UndefinedMetricError:
        pier_counts = None

    return ToyEvaluation(
        matrix_counts=MetricCounts(mat[0], 0, 0, mat[1]),
        embedded_counts=MetricCounts(emb[0], 0, 0, emb[1]),
        pier_counts=pier_counts,
    )
