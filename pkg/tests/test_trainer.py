import numpy as np
import pytest

from switchscore.errors import InvalidInputError, TrainingFailureError
from switchscore.trainer import (
    SyntheticCorpusSpec,
    ToyModel,
    TrainConfig,
    evaluate_toy,
    generate_corpus,
    toy_vocabulary,
    train,
)
from switchscore.tokenizer import ScriptClass, classify_script

# Small spec so trainer tests stay fast; the default spec is exercised
# by the acceptance suite.
SMALL = SyntheticCorpusSpec(
    matrix_vocab_size=4,
    embedded_vocab_size=2,
    switch_probability=0.25,
    utterance_length_range=(3, 6),
    num_utterances=60,
    feature_noise=0.3,
    seed=7,
)

FAST = TrainConfig(learning_rate=0.4, epochs=25, alpha=1.0, objective="standard")


class TestSpecValidation:
    def test_vocab_sizes(self):
        with pytest.raises(InvalidInputError):
            SyntheticCorpusSpec(matrix_vocab_size=0)
        with pytest.raises(InvalidInputError):
            SyntheticCorpusSpec(embedded_vocab_size=0)

    def test_length_range(self):
        with pytest.raises(InvalidInputError):
            SyntheticCorpusSpec(utterance_length_range=(0, 4))
        with pytest.raises(InvalidInputError):
            SyntheticCorpusSpec(utterance_length_range=(5, 4))

    def test_switch_probability_bounds(self):
        with pytest.raises(InvalidInputError):
            SyntheticCorpusSpec(switch_probability=-0.1)
        with pytest.raises(InvalidInputError):
            SyntheticCorpusSpec(switch_probability=1.1)
        SyntheticCorpusSpec(switch_probability=0.0)
        SyntheticCorpusSpec(switch_probability=1.0)

    def test_noise_nonnegative(self):
        with pytest.raises(InvalidInputError):
            SyntheticCorpusSpec(feature_noise=-0.01)

    def test_derived_sizes(self):
        assert SMALL.vocab_size == 6
        assert SMALL.stationary_embedded_mass == 0.25


class TestTrainConfigValidation:
    def test_learning_rate(self):
        with pytest.raises(InvalidInputError):
            TrainConfig(learning_rate=-0.1)
        with pytest.raises(InvalidInputError):
            TrainConfig(learning_rate=float("inf"))
        TrainConfig(learning_rate=0.0)

    def test_epochs(self):
        with pytest.raises(InvalidInputError):
            TrainConfig(epochs=0)

    def test_alpha(self):
        with pytest.raises(InvalidInputError):
            TrainConfig(alpha=0.0)

    def test_objective_name(self):
        with pytest.raises(InvalidInputError):
            TrainConfig(objective="focal")


class TestGenerateCorpus:
    def test_same_seed_is_identical(self):
        a = generate_corpus(SMALL)
        b = generate_corpus(SMALL)
        assert len(a.utterances) == len(b.utterances)
        for ua, ub in zip(a.utterances, b.utterances):
            assert ua.token_ids == ub.token_ids
            np.testing.assert_array_equal(ua.features, ub.features)

    def test_different_seed_differs(self):
        from dataclasses import replace

        a = generate_corpus(SMALL)
        b = generate_corpus(replace(SMALL, seed=8))
        assert any(
            ua.token_ids != ub.token_ids
            for ua, ub in zip(a.utterances, b.utterances)
        )

    def test_zero_switch_probability_is_all_matrix(self):
        from dataclasses import replace

        corpus = generate_corpus(replace(SMALL, switch_probability=0.0))
        for utt in corpus.utterances:
            assert all(not corpus.is_embedded_id(t) for t in utt.token_ids)

    def test_unit_switch_probability_is_all_embedded(self):
        from dataclasses import replace

        corpus = generate_corpus(replace(SMALL, switch_probability=1.0))
        for utt in corpus.utterances:
            assert all(corpus.is_embedded_id(t) for t in utt.token_ids)

    def test_embedded_fraction_near_stationary_mass(self):
        # The switch process picks embedded with probability p from either
        # state, so the chain's stationary embedded mass is exactly p.
        spec = SyntheticCorpusSpec(
            switch_probability=0.1,
            utterance_length_range=(4, 12),
            num_utterances=1250,
            seed=99,
        )
        corpus = generate_corpus(spec)
        total = embedded = 0
        for utt in corpus.utterances:
            total += len(utt.token_ids)
            embedded += sum(corpus.is_embedded_id(t) for t in utt.token_ids)
        assert total >= 9000
        assert abs(embedded / total - spec.stationary_embedded_mass) < 0.02

    def test_feature_shapes(self):
        corpus = generate_corpus(SMALL)
        for utt in corpus.utterances:
            assert utt.features.shape == (len(utt.token_ids), SMALL.vocab_size)

    def test_lengths_respect_range(self):
        corpus = generate_corpus(SMALL)
        lo, hi = SMALL.utterance_length_range
        assert all(lo <= len(u.token_ids) <= hi for u in corpus.utterances)

    def test_vocabulary_scripts(self):
        vocab = toy_vocabulary(SMALL)
        scripts = [classify_script(s) for s in vocab.surfaces]
        assert scripts[: SMALL.matrix_vocab_size] == [ScriptClass.ARABIC] * 4
        assert scripts[SMALL.matrix_vocab_size :] == [ScriptClass.LATIN] * 2

    def test_splits(self):
        corpus = generate_corpus(SMALL)
        assert len(corpus.train_split) == 48
        assert len(corpus.eval_split) == 12
        assert corpus.train_split + corpus.eval_split == corpus.utterances

    def test_single_utterance_shares_both_splits(self):
        from dataclasses import replace

        corpus = generate_corpus(replace(SMALL, num_utterances=1))
        assert corpus.train_split == corpus.utterances
        assert corpus.eval_split == corpus.utterances


class TestTrain:
    def test_deterministic_reports(self):
        corpus = generate_corpus(SMALL)
        _, first = train(corpus, FAST)
        _, second = train(corpus, FAST)
        assert first == second

    def test_alpha_one_weighted_equals_standard(self):
        from dataclasses import replace

        corpus = generate_corpus(SMALL)
        model_std, rep_std = train(corpus, replace(FAST, objective="standard"))
        model_w, rep_w = train(corpus, replace(FAST, objective="weighted", alpha=1.0))
        np.testing.assert_array_equal(model_std.weights, model_w.weights)
        np.testing.assert_array_equal(model_std.bias, model_w.bias)
        assert rep_std.loss_trace == rep_w.loss_trace

    def test_zero_learning_rate_keeps_zero_weights(self):
        from dataclasses import replace

        corpus = generate_corpus(SMALL)
        model, report = train(corpus, replace(FAST, learning_rate=0.0))
        assert not model.weights.any()
        assert not model.bias.any()
        # Every epoch sees the same parameters, hence the same loss.
        assert len(set(report.loss_trace)) == 1

    @pytest.mark.filterwarnings("ignore:overflow encountered")
    def test_overflowing_learning_rate_fails_with_epoch(self):
        from dataclasses import replace

        corpus = generate_corpus(SMALL)
        with pytest.raises(TrainingFailureError) as err:
            train(corpus, replace(FAST, learning_rate=1e308))
        assert err.value.epoch >= 1
        assert f"epoch {err.value.epoch}" in str(err.value)

    def test_loss_nonincreasing_at_small_learning_rate(self):
        from dataclasses import replace

        corpus = generate_corpus(replace(SMALL, feature_noise=0.0))
        _, report = train(corpus, replace(FAST, learning_rate=0.05, epochs=10))
        trace = report.loss_trace
        assert len(trace) == 10
        for prev, cur in zip(trace, trace[1:]):
            assert cur <= prev + 1e-9

    def test_multitask_adds_language_term(self):
        from dataclasses import replace

        corpus = generate_corpus(SMALL)
        _, standard = train(corpus, FAST)
        _, multi = train(
            corpus, replace(FAST, objective="multitask", alpha=0.3)
        )
        assert len(multi.loss_trace) == len(standard.loss_trace)
        # The language cross-entropy is non-negative, so every epoch's
        # total sits at or above the token-only loss.
        for token_only, total in zip(standard.loss_trace, multi.loss_trace):
            assert total >= token_only - 1e-12

    def test_report_echoes_config(self):
        corpus = generate_corpus(SMALL)
        _, report = train(corpus, FAST)
        assert report.objective == "standard"
        assert report.alpha == 1.0
        assert len(report.loss_trace) == FAST.epochs
        assert all(np.isfinite(v) for v in report.loss_trace)

    def test_weighting_reduces_embedded_error_on_small_spec(self):
        from dataclasses import replace

        corpus = generate_corpus(SMALL)
        _, base = train(corpus, replace(FAST, epochs=60))
        _, weighted = train(
            corpus, replace(FAST, epochs=60, objective="weighted", alpha=1.5)
        )
        assert weighted.evaluation.embedded_error <= base.evaluation.embedded_error


class TestEvaluateToy:
    def test_perfect_model_scores_zero(self):
        from dataclasses import replace

        # Noise-free features are the prototypes themselves; the identity
        # map scores every token's own axis highest.
        corpus = generate_corpus(replace(SMALL, feature_noise=0.0))
        model = ToyModel(
            weights=np.eye(SMALL.vocab_size), bias=np.zeros(SMALL.vocab_size)
        )
        ev = evaluate_toy(model, corpus)
        assert ev.matrix_error == 0.0
        assert ev.embedded_error == 0.0
        assert ev.pier_proxy == 0.0

    def test_constant_predictor_misses_every_embedded_token(self):
        corpus = generate_corpus(SMALL)
        bias = np.zeros(SMALL.vocab_size)
        bias[0] = 10.0
        model = ToyModel(weights=np.zeros((SMALL.vocab_size, SMALL.vocab_size)), bias=bias)
        ev = evaluate_toy(model, corpus)
        assert ev.embedded_error == 1.0
        assert ev.pier_proxy == 1.0

    def test_counts_match_positional_recount(self):
        rng = np.random.default_rng(31)
        corpus = generate_corpus(SMALL)
        model = ToyModel(
            weights=rng.normal(size=(SMALL.vocab_size, SMALL.vocab_size)),
            bias=rng.normal(size=SMALL.vocab_size),
        )
        ev = evaluate_toy(model, corpus)
        mat_wrong = mat_total = emb_wrong = emb_total = 0
        for utt in corpus.eval_split:
            pred = np.argmax(utt.features @ model.weights + model.bias, axis=-1)
            for want, got in zip(utt.token_ids, pred):
                if corpus.is_embedded_id(want):
                    emb_total += 1
                    emb_wrong += int(got) != want
                else:
                    mat_total += 1
                    mat_wrong += int(got) != want
        assert ev.matrix_counts.substitutions == mat_wrong
        assert ev.matrix_counts.n_ref == mat_total
        assert ev.embedded_counts.substitutions == emb_wrong
        assert ev.embedded_counts.n_ref == emb_total

    def test_pier_proxy_none_without_embedded_tokens(self):
        from dataclasses import replace

        corpus = generate_corpus(replace(SMALL, switch_probability=0.0))
        model = ToyModel(
            weights=np.eye(SMALL.vocab_size), bias=np.zeros(SMALL.vocab_size)
        )
        ev = evaluate_toy(model, corpus)
        assert ev.pier_proxy is None
        assert ev.embedded_error is None
