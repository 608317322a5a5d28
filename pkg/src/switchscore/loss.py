"""Token-weighted cross-entropy and the language-tagging auxiliary loss.

The weighted loss is

    L = -(1 / sum(w)) * sum_{i,t} w[i,t] * log p(target[i,t])

with one weight per target token. Padding positions carry weight zero,
which removes them from the sum and from the normalizer. Plain
cross-entropy is the alpha = 1 special case: the mask itself is the
weight vector, so both reductions share one code path and agree bit for
bit.

The analytic gradient with respect to the logits is

    dL/dz[i,t] = (w[i,t] / sum(w)) * (softmax(z[i,t]) - onehot(target[i,t]))

All math is float64.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError, TranscriptParseError
from .tokenizer import ScriptClass, classify_script


@dataclass(frozen=True)
class Vocabulary:
    """Dense token-id table: ids are 0..len-1 in surface order."""

    surfaces: tuple[str, ...]

    def __post_init__(self):
        seen = {}
        for i, s in enumerate(self.surfaces):
            if not s:
                raise InvalidInputError(f"empty surface at token id {i}")
            if "\t" in s or "\n" in s or "\r" in s:
                raise InvalidInputError(
                    f"surface at token id {i} contains a tab or newline"
                )
            if s in seen:
                raise InvalidInputError(
                    f"duplicate surface {s!r} at token ids {seen[s]} and {i}"
                )
            seen[s] = i
        object.__setattr__(self, "_ids", seen)

    def __len__(self) -> int:
        return len(self.surfaces)

    def id_of(self, surface: str) -> int:
        try:
            return self._ids[surface]
        except KeyError:
            raise InvalidInputError(f"surface not in vocabulary: {surface!r}") from None

    def surface_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.surfaces):
            raise InvalidInputError(f"token id out of range: {token_id}")
        return self.surfaces[token_id]

    def encode(self, surfaces: Iterable[str]) -> list[int]:
        return [self.id_of(s) for s in surfaces]

    def save_tsv(self, path: str | Path) -> None:
        lines = [f"{i}\t{s}\n" for i, s in enumerate(self.surfaces)]
        Path(path).write_text("".join(lines), encoding="utf-8")

    @classmethod
    def load_tsv(cls, path: str | Path) -> "Vocabulary":
        path = Path(path)
        surfaces = []
        with open(path, encoding="utf-8-sig") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n").rstrip("\r")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise TranscriptParseError(
                        f"expected 'token_id<TAB>surface', got {len(parts)} fields",
                        path=str(path),
                        line=lineno,
                    )
                id_text, surface = parts
                try:
                    token_id = int(id_text)
                except ValueError:
                    raise TranscriptParseError(
                        f"token id is not an integer: {id_text!r}",
                        path=str(path),
                        line=lineno,
                    ) from None
                if token_id != len(surfaces):
                    raise TranscriptParseError(
                        f"token ids must be dense and ordered; "
                        f"expected {len(surfaces)}, got {token_id}",
                        path=str(path),
                        line=lineno,
                    )
                surfaces.append(surface)
        if not surfaces:
            raise TranscriptParseError("vocabulary file is empty", path=str(path))
        return cls(surfaces=tuple(surfaces))


@dataclass(frozen=True)
class WeightTable:
    """Per-token-id loss weights with the script class each id got."""

    weights: np.ndarray  # float64 [V]
    scripts: tuple[ScriptClass, ...]

    def __post_init__(self):
        if self.weights.ndim != 1 or len(self.weights) != len(self.scripts):
            raise InvalidInputError("weight table shape does not match scripts")

    def __len__(self) -> int:
        return len(self.scripts)


def build_weight_table(
    vocab: Vocabulary,
    alpha: float,
    embedded_scripts: frozenset[ScriptClass] = frozenset({ScriptClass.LATIN}),
    mixed_is_embedded: bool = True,
) -> WeightTable:
    """Weight alpha for embedded-script tokens, 1.0 for everything else."""
    if not alpha > 0:
        raise InvalidInputError("alpha must be positive")
    scripts = tuple(classify_script(s) for s in vocab.surfaces)
    weights = np.ones(len(vocab), dtype=np.float64)
    for i, script in enumerate(scripts):
        if script in embedded_scripts or (
            mixed_is_embedded and script is ScriptClass.MIXED
        ):
            weights[i] = alpha
    return WeightTable(weights=weights, scripts=scripts)


@dataclass(frozen=True)
class BatchTargets:
    """Padded target ids plus a 0/1 validity mask, both [B, T]."""

    targets: np.ndarray  # int64 [B, T]
    mask: np.ndarray  # float64 [B, T]

    def __post_init__(self):
        if self.targets.shape != self.mask.shape:
            raise InvalidInputError("targets and mask must share a shape")


def pad_batch(sequences: Sequence[Sequence[int]], pad_id: int = 0) -> BatchTargets:
    if not sequences:
        raise InvalidInputError("cannot pad an empty batch")
    width = max(len(s) for s in sequences)
    if width == 0:
        raise InvalidInputError("cannot pad a batch of empty sequences")
    targets = np.full((len(sequences), width), pad_id, dtype=np.int64)
    mask = np.zeros((len(sequences), width), dtype=np.float64)
    for row, seq in enumerate(sequences):
        targets[row, : len(seq)] = list(seq)
        mask[row, : len(seq)] = 1.0
    return BatchTargets(targets=targets, mask=mask)


def lookup_weights(
    table: WeightTable, targets: np.ndarray, mask: np.ndarray
) -> np.ndarray:
    """Per-position weights: table weight of each target id, zeroed at padding."""
    if targets.shape != mask.shape:
        raise InvalidInputError("targets and mask must share a shape")
    if targets.size and (targets.min() < 0 or targets.max() >= len(table)):
        raise InvalidInputError("target id out of vocabulary range")
    return table.weights[targets] * mask


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable log-softmax over the last axis, in float64."""
    z = np.asarray(logits, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _check_ce_inputs(logits: np.ndarray, targets: np.ndarray, weights: np.ndarray):
    if logits.ndim < 2:
        raise InvalidInputError("logits need at least a (position, class) shape")
    if targets.shape != logits.shape[:-1]:
        raise InvalidInputError(
            f"targets shape {targets.shape} does not match logits {logits.shape}"
        )
    if weights.shape != targets.shape:
        raise InvalidInputError(
            f"weights shape {weights.shape} does not match targets {targets.shape}"
        )
    if targets.size and (targets.min() < 0 or targets.max() >= logits.shape[-1]):
        raise InvalidInputError("target id out of class range")
    if np.any(weights < 0):
        raise InvalidInputError("weights must be non-negative")


def weighted_ce(
    logits: np.ndarray, targets: np.ndarray, weights: np.ndarray
) -> float:
    """Weighted cross-entropy, normalized by the weight sum."""
    logits = np.asarray(logits, dtype=np.float64)
    targets = np.asarray(targets)
    weights = np.asarray(weights, dtype=np.float64)
    _check_ce_inputs(logits, targets, weights)
    wsum = weights.sum()
    if not wsum > 0:
        raise InvalidInputError("weight sum must be positive")
    logp = log_softmax(logits)
    picked = np.take_along_axis(logp, targets[..., None], axis=-1)[..., 0]
    return float(-(weights * picked).sum() / wsum)


def standard_ce(logits: np.ndarray, targets: np.ndarray, mask: np.ndarray) -> float:
    """Mask-normalized cross-entropy; the weight-one case of weighted_ce."""
    return weighted_ce(logits, targets, np.asarray(mask, dtype=np.float64))


def grad_weighted_ce(
    logits: np.ndarray, targets: np.ndarray, weights: np.ndarray
) -> np.ndarray:
    """dL/dlogits for weighted_ce; same shape as logits."""
    logits = np.asarray(logits, dtype=np.float64)
    targets = np.asarray(targets)
    weights = np.asarray(weights, dtype=np.float64)
    _check_ce_inputs(logits, targets, weights)
    wsum = weights.sum()
    if not wsum > 0:
        raise InvalidInputError("weight sum must be positive")
    grad = np.exp(log_softmax(logits))
    rows = np.take_along_axis(grad, targets[..., None], axis=-1)[..., 0] - 1.0
    np.put_along_axis(grad, targets[..., None], rows[..., None], axis=-1)
    return grad * (weights / wsum)[..., None]


@dataclass(frozen=True)
class MultitaskLoss:
    total: float
    token: float
    language: float


def multitask_loss(
    logits: np.ndarray,
    targets: np.ndarray,
    mask: np.ndarray,
    lang_logits: np.ndarray,
    lang_targets: np.ndarray,
    lang_mask: np.ndarray,
    lang_scale: float,
) -> MultitaskLoss:
    """Token cross-entropy plus a scaled language-tag cross-entropy.

    The language head scores each position as matrix (0) or embedded (1);
    positions without a language label (neutral tokens, padding) carry a
    zero lang_mask and drop out of that term entirely.
    """
    if not lang_scale >= 0:
        raise InvalidInputError("language loss scale must be non-negative")
    token = standard_ce(logits, targets, mask)
    lang_mask = np.asarray(lang_mask, dtype=np.float64)
    if lang_mask.sum() > 0:
        language = standard_ce(lang_logits, lang_targets, lang_mask)
    else:
        # No position carries a language label; the term vanishes.
        language = 0.0
    return MultitaskLoss(
        total=token + lang_scale * language, token=token, language=language
    )
