"""Figure rendering for breakdown and training reports.

matplotlib is imported lazily with the Agg backend so figure-free CLI
paths stay fast and headless environments work. PNG output carries a
fixed metadata block; rendering the same report twice produces the same
bytes.
"""

from __future__ import annotations

from typing import Sequence

from .metrics import BreakdownReport
from .trainer import TrainReport

_PNG_METADATA = {"Software": "switchscore"}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_breakdown_figure(report: BreakdownReport, path: str) -> None:
    """Grouped bars: substitution/deletion/insertion counts per bucket."""
    plt = _pyplot()
    buckets = ("embedded", "matrix", "neutral")
    counts = (report.embedded, report.matrix, report.neutral)
    series = (
        ("substitutions", [c.substitutions for c in counts]),
        ("deletions", [c.deletions for c in counts]),
        ("insertions", [c.insertions for c in counts]),
    )
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    width = 0.25
    for k, (label, values) in enumerate(series):
        xs = [i + (k - 1) * width for i in range(len(buckets))]
        ax.bar(xs, values, width=width, label=label)
    ax.set_xticks(range(len(buckets)))
    ax.set_xticklabels(buckets)
    ax.set_ylabel("error count")
    ax.set_title("Edit operations by token class")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)


def render_training_figure(
    runs: Sequence[TrainReport],
    path: str,
    baseline: Sequence[TrainReport] | None = None,
) -> None:
    """Per-seed loss curves, with dashed baseline curves when given."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for run in runs:
        xs = range(1, len(run.loss_trace) + 1)
        ax.plot(xs, run.loss_trace, label=f"alpha={run.alpha:g} seed={run.seed}")
    for run in baseline or ():
        xs = range(1, len(run.loss_trace) + 1)
        ax.plot(
            xs,
            run.loss_trace,
            linestyle="--",
            linewidth=1.0,
            color="0.5",
            label=f"baseline seed={run.seed}",
        )
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_title("Training loss")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)
