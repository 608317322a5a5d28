"""Corpus evaluation pipeline and deterministic report assembly.

One worker scores a (reference, hypothesis) pair: normalize, segment,
align, then compute WER, MER, PIER counts and the hallucination flag.
Corpus figures are pooled from per-utterance counts. The hallucination
filter excises flagged utterances from WER/MER pooling and from the
breakdown, never from PIER pooling.

Report dictionaries use a fixed key order and rates rounded to four
decimal places, so serializing the same inputs twice yields the same
bytes. Parallel scoring with --jobs preserves input order and therefore
output bytes.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from . import __version__
from .align import Alignment, align
from .errors import InvalidInputError, UndefinedMetricError
from .metrics import (
    BreakdownReport,
    EvalConfig,
    MetricCounts,
    aggregate_corpus,
    error_breakdown,
    is_hallucination,
    pier,
    points_of_interest,
    word_error_rate,
    PoiSet,
)
from .textio import TranscriptPair
from .tokenizer import (
    DEFAULT_NORMALIZATION,
    NormalizationOptions,
    Token,
    segment_units,
    segment_words,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class UtteranceScore:
    id: str
    wer: MetricCounts | None
    mer: MetricCounts | None
    pier: MetricCounts | None
    hallucinated: bool
    empty_ref: bool
    breakdown_item: tuple[Alignment, PoiSet, tuple[Token, ...]] | None


@dataclass(frozen=True)
class CorpusScores:
    scores: tuple[UtteranceScore, ...]
    filter_hallucinations: bool
    wer: MetricCounts | None
    mer: MetricCounts | None
    pier: MetricCounts | None
    breakdown: BreakdownReport
    hallucination_excluded_ids: tuple[str, ...]
    empty_reference_ids: tuple[str, ...]


def score_pair(
    pair: TranscriptPair,
    cfg: EvalConfig = EvalConfig(),
    norm: NormalizationOptions = DEFAULT_NORMALIZATION,
) -> UtteranceScore:
    ref_words = segment_words(pair.ref_text, norm)
    if not ref_words:
        return UtteranceScore(
            id=pair.id,
            wer=None,
            mer=None,
            pier=None,
            hallucinated=False,
            empty_ref=True,
            breakdown_item=None,
        )
    hyp_words = segment_words(pair.hyp_text, norm)
    ref_units = segment_units(pair.ref_text, norm)
    hyp_units = segment_units(pair.hyp_text, norm)

    hallucinated = is_hallucination(
        len(ref_units), len(hyp_units), cfg.hallucination_factor
    )
    word_alignment = align(ref_words, hyp_words)
    wer_counts = word_error_rate(word_alignment)
    mer_counts = word_error_rate(align(ref_units, hyp_units))
    poi = points_of_interest(ref_words, cfg)
    pier_counts = pier(word_alignment, poi) if poi.n_poi > 0 else None
    return UtteranceScore(
        id=pair.id,
        wer=wer_counts,
        mer=mer_counts,
        pier=pier_counts,
        hallucinated=hallucinated,
        empty_ref=False,
        breakdown_item=(word_alignment, poi, ref_words),
    )


def evaluate_corpus(
    pairs: Sequence[TranscriptPair],
    cfg: EvalConfig = EvalConfig(),
    norm: NormalizationOptions = DEFAULT_NORMALIZATION,
    filter_hallucinations: bool = True,
    jobs: int = 1,
) -> CorpusScores:
    """Score every pair and pool. Raises when nothing at all is scorable."""
    if jobs < 1:
        raise InvalidInputError("jobs must be at least 1")
    if jobs == 1 or len(pairs) <= 1:
        scores = tuple(score_pair(p, cfg, norm) for p in pairs)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scores = tuple(pool.map(lambda p: score_pair(p, cfg, norm), pairs))

    if not any(not s.empty_ref for s in scores):
        raise UndefinedMetricError("corpus has no scorable utterances")

    flags = [s.hallucinated for s in scores]

    def pooled(entries, filtered: bool) -> MetricCounts | None:
        try:
            return aggregate_corpus(
                entries, flags, filter_hallucinations=filtered and filter_hallucinations
            )
        except UndefinedMetricError:
            return None

    items = [
        s.breakdown_item
        for s in scores
        if s.breakdown_item is not None
        and not (filter_hallucinations and s.hallucinated)
    ]
    return CorpusScores(
        scores=scores,
        filter_hallucinations=filter_hallucinations,
        wer=pooled((s.wer for s in scores), True),
        mer=pooled((s.mer for s in scores), True),
        pier=pooled((s.pier for s in scores), False),
        breakdown=error_breakdown(items, cfg),
        hallucination_excluded_ids=tuple(
            s.id for s in scores if s.hallucinated and filter_hallucinations
        ),
        empty_reference_ids=tuple(s.id for s in scores if s.empty_ref),
    )


def counts_block(counts: MetricCounts | None) -> dict | None:
    if counts is None:
        return None
    block = {
        "substitutions": counts.substitutions,
        "deletions": counts.deletions,
        "insertions": counts.insertions,
        "errors": counts.errors,
        "n_ref": counts.n_ref,
    }
    if counts.n_ref > 0:
        block["rate"] = round(counts.rate, 4)
        block["rate_pct"] = round(counts.rate * 100.0, 4)
    else:
        block["rate"] = None
        block["rate_pct"] = None
    return block


def config_block(
    cfg: EvalConfig,
    norm: NormalizationOptions,
    filter_hallucinations: bool,
    fmt: str,
) -> dict:
    return {
        "matrix_scripts": sorted(s.value for s in cfg.matrix_scripts),
        "embedded_scripts": sorted(s.value for s in cfg.embedded_scripts),
        "mixed_is_poi": cfg.mixed_is_poi,
        "hallucination_factor": cfg.hallucination_factor,
        "hallucination_filter": filter_hallucinations,
        "normalization": {
            "lowercase": norm.lowercase,
            "strip_punctuation": norm.strip_punctuation,
            "collapse_whitespace": norm.collapse_whitespace,
        },
        "format": fmt,
    }


def _corpus_block(result: CorpusScores) -> dict:
    return {
        "utterances": len(result.scores),
        "scored": sum(1 for s in result.scores if not s.empty_ref),
        "hallucination_excluded_ids": list(result.hallucination_excluded_ids),
        "empty_reference_ids": list(result.empty_reference_ids),
    }


def _warnings_for(result: CorpusScores) -> list[str]:
    warnings = [
        f"utterance {uid}: empty reference after normalization, excluded from scoring"
        for uid in result.empty_reference_ids
    ]
    if result.wer is None:
        warnings.append("WER/MER undefined: every scorable utterance was excluded")
    if result.pier is None:
        warnings.append("PIER undefined: corpus has no points of interest")
    return warnings


def eval_report_dict(
    result: CorpusScores,
    cfg: EvalConfig,
    norm: NormalizationOptions,
    fmt: str,
) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "switchscore", "version": __version__},
        "command": "eval",
        "config": config_block(cfg, norm, result.filter_hallucinations, fmt),
        "corpus": _corpus_block(result),
        "wer": counts_block(result.wer),
        "mer": counts_block(result.mer),
        "pier": counts_block(result.pier),
        "warnings": _warnings_for(result),
    }


def breakdown_report_dict(
    result: CorpusScores,
    cfg: EvalConfig,
    norm: NormalizationOptions,
    fmt: str,
) -> dict:
    bd = result.breakdown
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "switchscore", "version": __version__},
        "command": "breakdown",
        "config": config_block(cfg, norm, result.filter_hallucinations, fmt),
        "corpus": _corpus_block(result),
        "breakdown": {
            "embedded": counts_block(bd.embedded),
            "matrix": counts_block(bd.matrix),
            "neutral": counts_block(bd.neutral),
            "total_errors": bd.total_errors,
        },
        "warnings": _warnings_for(result),
    }


def to_json(doc: dict) -> str:
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def _fmt_pct(block: dict | None) -> str:
    if block is None or block.get("rate_pct") is None:
        return "-"
    return f"{block['rate_pct']:.2f}"


def _pretty_rows(rows: list[tuple[str, dict | None]]) -> str:
    header = ("metric", "rate%", "sub", "del", "ins", "errors", "n_ref")
    table = [header]
    for name, block in rows:
        if block is None:
            table.append((name, "-", "-", "-", "-", "-", "-"))
        else:
            table.append(
                (
                    name,
                    _fmt_pct(block),
                    str(block["substitutions"]),
                    str(block["deletions"]),
                    str(block["insertions"]),
                    str(block["errors"]),
                    str(block["n_ref"]),
                )
            )
    widths = [max(len(row[c]) for row in table) for c in range(len(header))]
    lines = [
        "  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip()
        for row in table
    ]
    return "\n".join(lines) + "\n"


def render_eval_pretty(doc: dict) -> str:
    return _pretty_rows(
        [("WER", doc["wer"]), ("MER", doc["mer"]), ("PIER", doc["pier"])]
    )


def render_breakdown_pretty(doc: dict) -> str:
    bd = doc["breakdown"]
    return _pretty_rows(
        [
            ("embedded", bd["embedded"]),
            ("matrix", bd["matrix"]),
            ("neutral", bd["neutral"]),
        ]
    )


def render_breakdown_csv(doc: dict) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["bucket", "substitutions", "deletions", "insertions", "errors", "n_ref", "rate"]
    )
    bd = doc["breakdown"]
    for bucket in ("embedded", "matrix", "neutral"):
        block = bd[bucket]
        rate = block["rate"]
        writer.writerow(
            [
                bucket,
                block["substitutions"],
                block["deletions"],
                block["insertions"],
                block["errors"],
                block["n_ref"],
                "" if rate is None else rate,
            ]
        )
    return out.getvalue()
