"""Error rates over alignments: WER, MER, PIER and the error breakdown.

PIER restricts scoring to "points of interest", the reference positions
holding embedded-language words. Given an alignment's operation set A and
a POI index set I, the scored subset is

    A_I* = {o in A, o not a match | i_src(o) in I}

and, when max(I) equals the reference length, additionally every
operation with i_src past the reference end (trailing insertions attach
to the final reference token). PIER is |A_I| / |I|.

Corpus rates are pooled (micro-averaged): error counts and reference
counts are summed across utterances and the rate is recomputed from the
sums, never averaged over per-utterance rates. Utterances whose rate is
undefined (zero reference count) contribute nothing.

The hallucination rule excludes a hypothesis more than ``factor`` times
longer than its reference from overall WER/MER pooling; PIER pooling is
never filtered, since a hypothesis that long still only touches the same
points of interest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .align import Alignment, EditOp, EditOpKind, align
from .errors import InvalidInputError, UndefinedMetricError
from .tokenizer import ScriptClass, Token, Utterance

LETTER_SCRIPTS = frozenset(
    {ScriptClass.LATIN, ScriptClass.ARABIC, ScriptClass.HAN}
)


@dataclass(frozen=True)
class MetricCounts:
    substitutions: int
    deletions: int
    insertions: int
    n_ref: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def rate(self) -> float:
        if self.n_ref <= 0:
            raise UndefinedMetricError("rate undefined for zero reference count")
        return self.errors / self.n_ref


@dataclass(frozen=True)
class PoiSet:
    """Reference indices designated as points of interest."""

    indices: frozenset[int]
    ref_len: int

    def __post_init__(self):
        bad = [i for i in self.indices if not 1 <= i <= self.ref_len]
        if bad:
            raise InvalidInputError(
                f"POI indices out of range 1..{self.ref_len}: {sorted(bad)}"
            )

    @property
    def n_poi(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class BreakdownReport:
    embedded: MetricCounts
    matrix: MetricCounts
    neutral: MetricCounts

    @property
    def total_errors(self) -> int:
        return self.embedded.errors + self.matrix.errors + self.neutral.errors


@dataclass(frozen=True)
class EvalConfig:
    """Which scripts count as matrix vs embedded, and filtering knobs.

    Defaults match Arabic-English and Mandarin-English setups at once:
    Arabic and Han are matrix scripts, Latin is embedded, tokens mixing
    scripts count as points of interest, hypotheses over 10x the
    reference length are treated as hallucinations.
    """

    matrix_scripts: frozenset[ScriptClass] = frozenset(
        {ScriptClass.ARABIC, ScriptClass.HAN}
    )
    embedded_scripts: frozenset[ScriptClass] = frozenset({ScriptClass.LATIN})
    mixed_is_poi: bool = True
    hallucination_factor: float = 10.0

    def __post_init__(self):
        # A script may appear in both sets; embedded status wins wherever
        # the two matter together (breakdown attribution).
        if ScriptClass.NEUTRAL in self.embedded_scripts:
            raise InvalidInputError("neutral tokens are never points of interest")
        if not self.hallucination_factor > 0:
            raise InvalidInputError("hallucination factor must be positive")


def _counts_from_ops(ops: Iterable[EditOp], n_ref: int) -> MetricCounts:
    s = d = i = 0
    for op in ops:
        if op.kind is EditOpKind.SUBSTITUTION:
            s += 1
        elif op.kind is EditOpKind.DELETION:
            d += 1
        elif op.kind is EditOpKind.INSERTION:
            i += 1
    return MetricCounts(substitutions=s, deletions=d, insertions=i, n_ref=n_ref)


def word_error_rate(alignment: Alignment) -> MetricCounts:
    """Substitution/deletion/insertion counts over the whole alignment.

    The rate is (S + D + I) / ref_len and may exceed 1.0.
    """
    if alignment.ref_len == 0:
        raise UndefinedMetricError("WER undefined for an empty reference")
    return _counts_from_ops(alignment.ops, alignment.ref_len)


def points_of_interest(ref: Sequence[Token], cfg: EvalConfig) -> PoiSet:
    """Indices of embedded-language reference tokens (1-based).

    Mixed-script tokens are included when the config says so; neutral
    tokens never are.
    """
    poi = set()
    for tok in ref:
        if tok.script in cfg.embedded_scripts:
            poi.add(tok.index)
        elif tok.script is ScriptClass.MIXED and cfg.mixed_is_poi:
            poi.add(tok.index)
    return PoiSet(indices=frozenset(poi), ref_len=len(ref))


def filter_ops_at_poi(alignment: Alignment, poi: PoiSet) -> tuple[EditOp, ...]:
    """The subset of (non-match) edit operations scored by PIER.

    Operations whose source index is a point of interest are kept; when
    the final reference token is itself a point of interest, operations
    indexed past the reference end (trailing insertions) are kept too.
    """
    if alignment.ref_len != poi.ref_len:
        raise InvalidInputError(
            f"alignment covers {alignment.ref_len} reference tokens, "
            f"POI set covers {poi.ref_len}"
        )
    include_trailing = bool(poi.indices) and max(poi.indices) == poi.ref_len
    kept = []
    for op in alignment.ops:
        if op.kind is EditOpKind.MATCH:
            continue
        if op.i_src in poi.indices or (include_trailing and op.i_src > poi.ref_len):
            kept.append(op)
    return tuple(kept)


def pier(alignment: Alignment, poi: PoiSet) -> MetricCounts:
    """Point-of-interest error rate counts; n_ref is the POI count."""
    if poi.n_poi == 0:
        raise UndefinedMetricError("PIER undefined without points of interest")
    return _counts_from_ops(filter_ops_at_poi(alignment, poi), poi.n_poi)


def _tokens_of(utt: Utterance | Sequence[Token]) -> Sequence[Token]:
    return utt.tokens if isinstance(utt, Utterance) else utt


def mixed_error_rate(
    ref: Utterance | Sequence[Token], hyp: Utterance | Sequence[Token]
) -> MetricCounts:
    """WER over mixed-granularity units (Han characters, other words)."""
    ref_tokens = _tokens_of(ref)
    if len(ref_tokens) == 0:
        raise UndefinedMetricError("MER undefined for an empty reference")
    return word_error_rate(align(ref_tokens, _tokens_of(hyp)))


def is_hallucination(ref_units: int, hyp_units: int, factor: float = 10.0) -> bool:
    """True when the hypothesis is strictly longer than factor x reference."""
    if ref_units <= 0:
        raise InvalidInputError("reference length must be positive")
    if not factor > 0:
        raise InvalidInputError("hallucination factor must be positive")
    return hyp_units > factor * ref_units


def aggregate_corpus(
    per_utterance: Iterable[MetricCounts | None],
    hallucinated: Iterable[bool] | None = None,
    filter_hallucinations: bool = False,
) -> MetricCounts:
    """Pool per-utterance counts into corpus counts.

    Entries that are None or have a zero reference count contribute
    nothing. When filtering, entries flagged as hallucinated are skipped;
    callers pooling PIER must not pass the filter (PIER is never
    hallucination-filtered).
    """
    entries = list(per_utterance)
    if hallucinated is None:
        flags = [False] * len(entries)
    else:
        flags = list(hallucinated)
        if len(flags) != len(entries):
            raise InvalidInputError("hallucination flags must match entries one to one")
    s = d = i = n = 0
    contributed = False
    for counts, flagged in zip(entries, flags):
        if counts is None or counts.n_ref == 0:
            continue
        if filter_hallucinations and flagged:
            continue
        s += counts.substitutions
        d += counts.deletions
        i += counts.insertions
        n += counts.n_ref
        contributed = True
    if not contributed:
        raise UndefinedMetricError("no utterance contributed a defined metric")
    return MetricCounts(substitutions=s, deletions=d, insertions=i, n_ref=n)


def error_breakdown(
    items: Iterable[tuple[Alignment, PoiSet, Sequence[Token]]],
    cfg: EvalConfig,
) -> BreakdownReport:
    """Attribute every non-match operation to embedded, matrix or neutral.

    Embedded gets the POI-filtered operations (including the trailing
    insertions the POI rule claims). Of the rest, operations at reference
    positions holding a matrix-script token go to matrix; everything else
    (neutral positions, mixed tokens outside the POI set, insertions past
    the end of a non-POI-final reference) lands in neutral. Per-bucket
    reference counts partition the reference positions the same way, so
    embedded.rate is exactly the pooled PIER.
    """
    tallies = {
        "embedded": [0, 0, 0, 0],  # S, D, I, N
        "matrix": [0, 0, 0, 0],
        "neutral": [0, 0, 0, 0],
    }
    kind_slot = {
        EditOpKind.SUBSTITUTION: 0,
        EditOpKind.DELETION: 1,
        EditOpKind.INSERTION: 2,
    }

    for alignment, poi, ref_tokens in items:
        poi_ops = set(filter_ops_at_poi(alignment, poi))
        for op in alignment.ops:
            if op.kind is EditOpKind.MATCH:
                continue
            tallies[_bucket_for(op, poi_ops, poi, ref_tokens, cfg)][kind_slot[op.kind]] += 1
        for tok in ref_tokens:
            if tok.index in poi.indices:
                tallies["embedded"][3] += 1
            elif tok.script in cfg.matrix_scripts:
                tallies["matrix"][3] += 1
            else:
                tallies["neutral"][3] += 1

    def as_counts(name: str) -> MetricCounts:
        s, d, i, n = tallies[name]
        return MetricCounts(substitutions=s, deletions=d, insertions=i, n_ref=n)

    return BreakdownReport(
        embedded=as_counts("embedded"),
        matrix=as_counts("matrix"),
        neutral=as_counts("neutral"),
    )


def _bucket_for(
    op: EditOp,
    poi_ops: set[EditOp],
    poi: PoiSet,
    ref_tokens: Sequence[Token],
    cfg: EvalConfig,
) -> str:
    if op in poi_ops:
        return "embedded"
    # Insertions past the reference end attach to the final token.
    pos = min(op.i_src, poi.ref_len)
    if pos >= 1 and ref_tokens[pos - 1].script in cfg.matrix_scripts:
        return "matrix"
    return "neutral"


def relative_improvement(baseline_rate: float, new_rate: float) -> float:
    """Percent improvement of new over baseline: 100 (baseline - new) / baseline."""
    if not baseline_rate > 0:
        raise InvalidInputError("baseline rate must be positive")
    return 100.0 * (baseline_rate - new_rate) / baseline_rate
