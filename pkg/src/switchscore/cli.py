"""Command-line front end.

Subcommands: eval, breakdown, build-weights, train-toy. Reports are JSON
on stdout (or --out); --pretty renders an aligned table instead. Exit
codes: 0 success, 1 usage or parse error, 2 undefined metric (for
example an empty corpus), 3 training failure.

All configuration flows through flags; no environment variables are
consulted. Output depends only on the inputs and flags, never on --jobs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .errors import (
    InvalidInputError,
    TranscriptParseError,
    TrainingFailureError,
    UndefinedMetricError,
)
from .loss import Vocabulary, build_weight_table
from .metrics import EvalConfig, relative_improvement
from .report import (
    breakdown_report_dict,
    counts_block,
    eval_report_dict,
    evaluate_corpus,
    render_breakdown_csv,
    render_breakdown_pretty,
    render_eval_pretty,
    to_json,
)
from .textio import FORMATS, read_transcripts
from .tokenizer import NormalizationOptions, ScriptClass
from .trainer import (
    OBJECTIVES,
    SyntheticCorpusSpec,
    TrainConfig,
    TrainReport,
    generate_corpus,
    train,
)

_SCRIPT_NAMES = {
    "latin": ScriptClass.LATIN,
    "arabic": ScriptClass.ARABIC,
    "han": ScriptClass.HAN,
}

_DEFAULT_TRAIN = TrainConfig()
_DEFAULT_SPEC = SyntheticCorpusSpec()


class _Parser(argparse.ArgumentParser):
    # Usage problems must exit 1, not argparse's default 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _stdout_write(text: str) -> None:
    buf = getattr(sys.stdout, "buffer", None)
    if buf is None:
        sys.stdout.write(text)
    else:
        buf.write(text.encode("utf-8"))
    sys.stdout.flush()


def _scripts(names: list[str] | None, default: frozenset[ScriptClass]) -> frozenset:
    if not names:
        return default
    return frozenset(_SCRIPT_NAMES[n] for n in names)


def _add_eval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("ref", help="reference transcript file")
    p.add_argument("hyp", help="hypothesis transcript file")
    p.add_argument(
        "--format",
        choices=FORMATS,
        default="auto",
        help="transcript layout (default: auto-detect)",
    )
    p.add_argument(
        "--matrix-script",
        action="append",
        choices=sorted(_SCRIPT_NAMES),
        help="matrix-language script, repeatable (default: arabic, han)",
    )
    p.add_argument(
        "--embedded-script",
        action="append",
        choices=sorted(_SCRIPT_NAMES),
        help="embedded-language script, repeatable (default: latin)",
    )
    p.add_argument(
        "--mixed-poi",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="count mixed-script reference tokens as points of interest",
    )
    p.add_argument(
        "--hallucination-factor",
        type=float,
        default=10.0,
        help="hypothesis/reference length ratio above which an utterance "
        "is flagged (default: 10)",
    )
    p.add_argument(
        "--hallucination-filter",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="exclude flagged utterances from WER/MER pooling "
        "(PIER is never filtered)",
    )
    p.add_argument(
        "--lowercase",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="lowercase during normalization",
    )
    p.add_argument(
        "--strip-punctuation",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="remove punctuation and symbols during normalization",
    )
    p.add_argument(
        "--collapse-whitespace",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="collapse whitespace runs during normalization",
    )
    p.add_argument("--jobs", type=int, default=1, help="scoring threads (default: 1)")
    p.add_argument("--out", help="write the JSON report to this file")
    p.add_argument(
        "--pretty",
        action="store_true",
        help="print an aligned table on stdout instead of JSON",
    )


def _eval_setup(args) -> tuple[EvalConfig, NormalizationOptions]:
    cfg = EvalConfig(
        matrix_scripts=_scripts(
            args.matrix_script, frozenset({ScriptClass.ARABIC, ScriptClass.HAN})
        ),
        embedded_scripts=_scripts(
            args.embedded_script, frozenset({ScriptClass.LATIN})
        ),
        mixed_is_poi=args.mixed_poi,
        hallucination_factor=args.hallucination_factor,
    )
    norm = NormalizationOptions(
        lowercase=args.lowercase,
        strip_punctuation=args.strip_punctuation,
        collapse_whitespace=args.collapse_whitespace,
    )
    return cfg, norm


def _emit_report(doc: dict, args, pretty_renderer) -> None:
    text = to_json(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    if args.pretty:
        _stdout_write(pretty_renderer(doc))
    elif not args.out:
        _stdout_write(text)
    for warning in doc.get("warnings", ()):
        print(f"warning: {warning}", file=sys.stderr)


def cmd_eval(args) -> int:
    cfg, norm = _eval_setup(args)
    pairs = read_transcripts(args.ref, args.hyp, args.format)
    result = evaluate_corpus(
        pairs, cfg, norm, args.hallucination_filter, args.jobs
    )
    doc = eval_report_dict(result, cfg, norm, args.format)
    _emit_report(doc, args, render_eval_pretty)
    return 0


def cmd_breakdown(args) -> int:
    cfg, norm = _eval_setup(args)
    pairs = read_transcripts(args.ref, args.hyp, args.format)
    result = evaluate_corpus(
        pairs, cfg, norm, args.hallucination_filter, args.jobs
    )
    doc = breakdown_report_dict(result, cfg, norm, args.format)
    if args.csv:
        Path(args.csv).write_text(render_breakdown_csv(doc), encoding="utf-8")
    if args.figure:
        from .figures import render_breakdown_figure

        render_breakdown_figure(result.breakdown, args.figure)
    _emit_report(doc, args, render_breakdown_pretty)
    return 0


def cmd_build_weights(args) -> int:
    vocab = Vocabulary.load_tsv(args.vocab)
    table = build_weight_table(
        vocab,
        args.alpha,
        embedded_scripts=_scripts(args.embedded_script, frozenset({ScriptClass.LATIN})),
        mixed_is_embedded=args.mixed_embedded,
    )
    lines = [
        f"{i}\t{vocab.surfaces[i]}\t{table.scripts[i].value}\t{float(table.weights[i])!r}\n"
        for i in range(len(vocab))
    ]
    text = "".join(lines)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        _stdout_write(text)
    return 0


_SPEC_KEYS = (
    "matrix_vocab_size",
    "embedded_vocab_size",
    "switch_probability",
    "utterance_length_range",
    "num_utterances",
    "feature_noise",
    "seed",
)


def _resolve_spec(args) -> SyntheticCorpusSpec:
    fields = {k: getattr(_DEFAULT_SPEC, k) for k in _SPEC_KEYS}
    if args.spec_file:
        try:
            data = json.loads(Path(args.spec_file).read_bytes().decode("utf-8-sig"))
        except OSError as exc:
            raise TranscriptParseError(f"cannot read file: {exc}", path=args.spec_file)
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise TranscriptParseError(str(exc), path=args.spec_file) from None
        if not isinstance(data, dict):
            raise TranscriptParseError(
                "spec file must hold a JSON object", path=args.spec_file
            )
        unknown = sorted(set(data) - set(_SPEC_KEYS))
        if unknown:
            raise InvalidInputError(f"unknown spec fields: {', '.join(unknown)}")
        fields.update(data)
    overrides = {
        "matrix_vocab_size": args.matrix_vocab_size,
        "embedded_vocab_size": args.embedded_vocab_size,
        "switch_probability": args.switch_probability,
        "num_utterances": args.num_utterances,
        "feature_noise": args.feature_noise,
        "seed": args.corpus_seed,
    }
    for key, value in overrides.items():
        if value is not None:
            fields[key] = value
    lo, hi = fields["utterance_length_range"]
    if args.min_length is not None:
        lo = args.min_length
    if args.max_length is not None:
        hi = args.max_length
    fields["utterance_length_range"] = (int(lo), int(hi))
    return SyntheticCorpusSpec(**fields)


def _round4(value: float | None) -> float | None:
    return None if value is None else round(value, 4)


def _run_block(rep: TrainReport) -> dict:
    ev = rep.evaluation
    return {
        "seed": rep.seed,
        "objective": rep.objective,
        "alpha": rep.alpha,
        "epochs": len(rep.loss_trace),
        "final_loss": rep.loss_trace[-1],
        "loss_trace": list(rep.loss_trace),
        "matrix_error": _round4(ev.matrix_error),
        "embedded_error": _round4(ev.embedded_error),
        "matrix_accuracy": _round4(rep.matrix_accuracy),
        "embedded_accuracy": _round4(rep.embedded_accuracy),
        "embedded_substitutions": rep.embedded_substitutions,
        "pier_proxy": _round4(ev.pier_proxy),
        "pier": counts_block(ev.pier_counts),
    }


def _stats(values: list[float | None]) -> dict | None:
    vals = [v for v in values if v is not None]
    if not vals:
        return None
    return {
        "mean": round(sum(vals) / len(vals), 4),
        "min": round(min(vals), 4),
        "max": round(max(vals), 4),
    }


def _mean_or_none(values: list[float | None]) -> float | None:
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


def cmd_train_toy(args) -> int:
    if args.seeds < 1:
        raise InvalidInputError("--seeds must be at least 1")
    spec = _resolve_spec(args)
    runs: list[TrainReport] = []
    baselines: list[TrainReport] = []
    for k in range(args.seeds):
        spec_k = replace(spec, seed=spec.seed + k)
        corpus = generate_corpus(spec_k)
        cfg = TrainConfig(
            learning_rate=args.learning_rate,
            epochs=args.epochs,
            alpha=args.alpha,
            objective=args.objective,
            seed=spec_k.seed,
        )
        try:
            _, rep = train(corpus, cfg)
        except TrainingFailureError as exc:
            raise TrainingFailureError(
                f"seed {spec_k.seed}: {exc}", epoch=exc.epoch
            ) from None
        runs.append(rep)
        if args.compare_baseline:
            base_cfg = replace(cfg, alpha=1.0, objective="standard")
            try:
                _, base_rep = train(corpus, base_cfg)
            except TrainingFailureError as exc:
                raise TrainingFailureError(
                    f"baseline seed {spec_k.seed}: {exc}", epoch=exc.epoch
                ) from None
            baselines.append(base_rep)

    aggregate = {
        "embedded_error": _stats([r.evaluation.embedded_error for r in runs]),
        "matrix_error": _stats([r.evaluation.matrix_error for r in runs]),
        "pier_proxy": _stats([r.evaluation.pier_proxy for r in runs]),
    }
    warnings: list[str] = []
    if args.compare_baseline:
        aggregate["baseline"] = {
            "embedded_error": _stats([r.evaluation.embedded_error for r in baselines]),
            "matrix_error": _stats([r.evaluation.matrix_error for r in baselines]),
            "pier_proxy": _stats([r.evaluation.pier_proxy for r in baselines]),
        }
        mean_base = _mean_or_none([r.evaluation.pier_proxy for r in baselines])
        mean_run = _mean_or_none([r.evaluation.pier_proxy for r in runs])
        if mean_base is None or mean_run is None or not mean_base > 0:
            aggregate["pier_improvement_pct"] = None
            warnings.append(
                "baseline PIER proxy is undefined or zero; improvement not computed"
            )
        else:
            aggregate["pier_improvement_pct"] = round(
                relative_improvement(mean_base, mean_run), 4
            )

    doc = {
        "schema_version": 1,
        "tool": {"name": "switchscore", "version": __version__},
        "command": "train-toy",
        "config": {
            "matrix_vocab_size": spec.matrix_vocab_size,
            "embedded_vocab_size": spec.embedded_vocab_size,
            "switch_probability": spec.switch_probability,
            "utterance_length_min": spec.utterance_length_range[0],
            "utterance_length_max": spec.utterance_length_range[1],
            "num_utterances": spec.num_utterances,
            "feature_noise": spec.feature_noise,
            "corpus_seed": spec.seed,
            "learning_rate": args.learning_rate,
            "epochs": args.epochs,
            "alpha": args.alpha,
            "objective": args.objective,
            "seeds": args.seeds,
            "compare_baseline": bool(args.compare_baseline),
        },
        "runs": [_run_block(r) for r in runs],
        "baseline_runs": [_run_block(r) for r in baselines],
        "aggregate": aggregate,
        "warnings": warnings,
    }
    if args.figure:
        from .figures import render_training_figure

        render_training_figure(runs, args.figure, baselines or None)
    _emit_report(doc, args, _render_train_pretty)
    return 0


def _render_train_pretty(doc: dict) -> str:
    header = ("seed", "objective", "alpha", "final_loss", "embedded%", "matrix%", "pier%")

    def pct(v):
        return "-" if v is None else f"{v * 100.0:.2f}"

    rows = [header]
    for run in doc["runs"]:
        rows.append(
            (
                str(run["seed"]),
                run["objective"],
                f"{run['alpha']:g}",
                f"{run['final_loss']:.4f}",
                pct(run["embedded_error"]),
                pct(run["matrix_error"]),
                pct(run["pier_proxy"]),
            )
        )
    agg = doc["aggregate"]

    def agg_pct(block):
        return "-" if block is None else f"{block['mean'] * 100.0:.2f}"

    rows.append(
        (
            "mean",
            "",
            "",
            "",
            agg_pct(agg["embedded_error"]),
            agg_pct(agg["matrix_error"]),
            agg_pct(agg["pier_proxy"]),
        )
    )
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    lines = [
        "  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip()
        for row in rows
    ]
    out = "\n".join(lines) + "\n"
    imp = agg.get("pier_improvement_pct")
    if imp is not None:
        out += f"PIER-proxy improvement over alpha=1 baseline: {imp:.2f}%\n"
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="switchscore",
        description="Code-switching ASR scoring and weighted-objective tools.",
    )
    parser.add_argument(
        "--version", action="version", version=f"switchscore {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p_eval = sub.add_parser(
        "eval", help="score a hypothesis file against a reference (WER/MER/PIER)"
    )
    _add_eval_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_break = sub.add_parser(
        "breakdown",
        help="attribute edit operations to embedded/matrix/neutral buckets",
    )
    _add_eval_flags(p_break)
    p_break.add_argument("--csv", help="also write the bucket table as CSV")
    p_break.add_argument("--figure", help="also render a grouped bar chart (PNG)")
    p_break.set_defaults(func=cmd_breakdown)

    p_weights = sub.add_parser(
        "build-weights", help="build a per-token loss weight table from a vocabulary"
    )
    p_weights.add_argument("vocab", help="vocabulary TSV: token_id<TAB>surface")
    p_weights.add_argument(
        "--alpha", type=float, required=True, help="weight for embedded-script tokens"
    )
    p_weights.add_argument(
        "--embedded-script",
        action="append",
        choices=sorted(_SCRIPT_NAMES),
        help="embedded-language script, repeatable (default: latin)",
    )
    p_weights.add_argument(
        "--mixed-embedded",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="give mixed-script tokens the embedded weight",
    )
    p_weights.add_argument("--out", help="write the table to this file")
    p_weights.set_defaults(func=cmd_build_weights)

    p_train = sub.add_parser(
        "train-toy", help="run the synthetic weighting experiment"
    )
    p_train.add_argument("--spec-file", help="JSON file with corpus spec fields")
    p_train.add_argument("--matrix-vocab-size", type=int)
    p_train.add_argument("--embedded-vocab-size", type=int)
    p_train.add_argument("--switch-probability", type=float)
    p_train.add_argument("--min-length", type=int)
    p_train.add_argument("--max-length", type=int)
    p_train.add_argument("--num-utterances", type=int)
    p_train.add_argument("--feature-noise", type=float)
    p_train.add_argument("--corpus-seed", type=int)
    p_train.add_argument(
        "--alpha", type=float, default=1.0, help="embedded-token weight (default: 1)"
    )
    p_train.add_argument(
        "--objective",
        choices=OBJECTIVES,
        default="weighted",
        help="training objective (default: weighted)",
    )
    p_train.add_argument(
        "--seeds",
        type=int,
        default=1,
        help="number of consecutive corpus seeds to run (default: 1)",
    )
    p_train.add_argument(
        "--learning-rate",
        "--lr",
        dest="learning_rate",
        type=float,
        default=_DEFAULT_TRAIN.learning_rate,
    )
    p_train.add_argument("--epochs", type=int, default=_DEFAULT_TRAIN.epochs)
    p_train.add_argument(
        "--compare-baseline",
        action="store_true",
        help="also train an alpha=1 baseline on the same corpora",
    )
    p_train.add_argument("--figure", help="render per-seed loss curves (PNG)")
    p_train.add_argument("--out", help="write the JSON report to this file")
    p_train.add_argument(
        "--pretty", action="store_true", help="print a summary table instead of JSON"
    )
    p_train.set_defaults(func=cmd_train_toy)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except TranscriptParseError as exc:
        print(f"switchscore: error: {exc}", file=sys.stderr)
        return 1
    except InvalidInputError as exc:
        print(f"switchscore: error: {exc}", file=sys.stderr)
        return 1
    except UndefinedMetricError as exc:
        print(f"switchscore: error: {exc}", file=sys.stderr)
        return 2
    except TrainingFailureError as exc:
        print(f"switchscore: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
