import json
from pathlib import Path

import pytest

from switchscore.errors import InvalidInputError, UndefinedMetricError
from switchscore.metrics import EvalConfig, MetricCounts
from switchscore.report import (
    counts_block,
    eval_report_dict,
    evaluate_corpus,
    render_breakdown_csv,
    render_eval_pretty,
    score_pair,
    breakdown_report_dict,
    to_json,
)
from switchscore.textio import TranscriptPair, read_transcripts
from switchscore.tokenizer import DEFAULT_NORMALIZATION

DATA = Path(__file__).parent / "data"


def fixture_pairs():
    return read_transcripts(DATA / "golden_ref.tsv", DATA / "golden_hyp.tsv")


class TestScorePair:
    def test_clean_pair(self):
        score = score_pair(TranscriptPair("u", "انا احب coffee", "انا احب Coffee."))
        assert score.wer.rate == 0.0
        assert score.pier.rate == 0.0
        assert not score.hallucinated
        assert not score.empty_ref

    def test_empty_reference_sentinel(self):
        score = score_pair(TranscriptPair("u", " ?! ", "something"))
        assert score.empty_ref
        assert score.wer is None and score.mer is None and score.pier is None

    def test_hallucination_flag(self):
        score = score_pair(TranscriptPair("u", "نعم", " ".join(["لا"] * 15)))
        assert score.hallucinated
        assert score.wer.insertions == 14

    def test_no_poi_means_no_pier(self):
        score = score_pair(TranscriptPair("u", "نعم جدا", "نعم"))
        assert score.pier is None
        assert score.wer is not None

    def test_mer_uses_han_character_units(self):
        score = score_pair(TranscriptPair("u", "我们 like", "我们 like"))
        assert score.wer.n_ref == 2
        assert score.mer.n_ref == 3

    def test_hallucination_uses_unit_counts(self):
        # 2 words but 3 units; 21 hypothesis units stay under 10x.
        score = score_pair(TranscriptPair("u", "我们 like", " ".join(["我"] * 21)))
        assert not score.hallucinated


class TestEvaluateCorpus:
    def test_golden_fixture_filtered(self):
        result = evaluate_corpus(fixture_pairs())
        assert result.wer == MetricCounts(2, 1, 2, 16)
        assert result.mer == MetricCounts(2, 1, 2, 16)
        assert result.pier == MetricCounts(2, 0, 1, 5)
        assert result.hallucination_excluded_ids == ("u5",)
        assert result.empty_reference_ids == ()

    def test_golden_fixture_unfiltered(self):
        result = evaluate_corpus(fixture_pairs(), filter_hallucinations=False)
        assert result.wer == MetricCounts(3, 1, 16, 17)
        assert result.mer == MetricCounts(3, 1, 16, 17)
        # PIER never changes with the filter.
        assert result.pier == MetricCounts(2, 0, 1, 5)
        assert result.hallucination_excluded_ids == ()

    def test_golden_fixture_breakdown(self):
        bd = evaluate_corpus(fixture_pairs()).breakdown
        assert bd.embedded == MetricCounts(2, 0, 1, 5)
        assert bd.matrix == MetricCounts(0, 1, 1, 11)
        assert bd.neutral == MetricCounts(0, 0, 0, 0)
        assert bd.total_errors == 5

    def test_jobs_do_not_change_results(self):
        assert evaluate_corpus(fixture_pairs(), jobs=1) == evaluate_corpus(
            fixture_pairs(), jobs=4
        )

    def test_jobs_must_be_positive(self):
        with pytest.raises(InvalidInputError):
            evaluate_corpus(fixture_pairs(), jobs=0)

    def test_nothing_scorable_raises(self):
        pairs = [TranscriptPair("u1", " ", "x"), TranscriptPair("u2", "?!", "y")]
        with pytest.raises(UndefinedMetricError):
            evaluate_corpus(pairs)

    def test_pier_none_for_monolingual_corpus(self):
        result = evaluate_corpus([TranscriptPair("u1", "نعم جدا", "نعم")])
        assert result.pier is None
        assert result.wer is not None


class TestReportRendering:
    def test_counts_block_rounds_to_four_places(self):
        block = counts_block(MetricCounts(1, 0, 0, 3))
        assert block == {
            "substitutions": 1,
            "deletions": 0,
            "insertions": 0,
            "errors": 1,
            "n_ref": 3,
            "rate": 0.3333,
            "rate_pct": 33.3333,
        }

    def test_counts_block_handles_zero_refs(self):
        block = counts_block(MetricCounts(0, 0, 0, 0))
        assert block["rate"] is None and block["rate_pct"] is None
        assert counts_block(None) is None

    def test_eval_report_shape(self):
        result = evaluate_corpus(fixture_pairs())
        doc = eval_report_dict(result, EvalConfig(), DEFAULT_NORMALIZATION, "auto")
        assert list(doc) == [
            "schema_version",
            "tool",
            "command",
            "config",
            "corpus",
            "wer",
            "mer",
            "pier",
            "warnings",
        ]
        assert doc["schema_version"] == 1
        assert doc["corpus"]["utterances"] == 6
        assert doc["corpus"]["scored"] == 6
        assert doc["wer"]["rate"] == 0.3125
        assert doc["pier"]["rate_pct"] == 60.0

    def test_to_json_is_stable_and_utf8_friendly(self):
        result = evaluate_corpus(fixture_pairs())
        doc = eval_report_dict(result, EvalConfig(), DEFAULT_NORMALIZATION, "auto")
        text = to_json(doc)
        assert text == to_json(json.loads(text))
        assert text.endswith("\n")

    def test_pretty_table_alignment(self):
        result = evaluate_corpus(fixture_pairs())
        doc = eval_report_dict(result, EvalConfig(), DEFAULT_NORMALIZATION, "auto")
        table = render_eval_pretty(doc)
        lines = table.splitlines()
        assert lines[0].split() == [
            "metric", "rate%", "sub", "del", "ins", "errors", "n_ref",
        ]
        assert lines[1].split() == ["WER", "31.25", "2", "1", "2", "5", "16"]
        assert lines[3].split() == ["PIER", "60.00", "2", "0", "1", "3", "5"]

    def test_breakdown_csv(self):
        result = evaluate_corpus(fixture_pairs())
        doc = breakdown_report_dict(result, EvalConfig(), DEFAULT_NORMALIZATION, "auto")
        rows = render_breakdown_csv(doc).splitlines()
        assert rows[0] == "bucket,substitutions,deletions,insertions,errors,n_ref,rate"
        assert rows[1] == "embedded,2,0,1,3,5,0.6"
        assert rows[2] == "matrix,0,1,1,2,11,0.1818"
        assert rows[3] == "neutral,0,0,0,0,0,"

    def test_warnings_mention_empty_references(self):
        pairs = [
            TranscriptPair("u1", "انا احب coffee", "انا احب coffee"),
            TranscriptPair("u2", " ", "x"),
        ]
        result = evaluate_corpus(pairs)
        doc = eval_report_dict(result, EvalConfig(), DEFAULT_NORMALIZATION, "auto")
        assert any("u2" in w for w in doc["warnings"])
        assert doc["corpus"]["empty_reference_ids"] == ["u2"]
