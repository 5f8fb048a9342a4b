"""Metrics output: JSON, CSV, an aligned text table and PNG figures.

Figures are rendered with the Agg backend so report generation works on
headless machines.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path as FilePath

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .harness import EpisodeRecord, MetricsReport  # noqa: E402


def metrics_text_table(report: MetricsReport) -> str:
    """Aligned table mirroring the per-difficulty layout: Accuracy,
    D1..D5, Avg. Steps."""
    headers = ["Accuracy", "D1", "D2", "D3", "D4", "D5", "Avg. Steps"]
    row = [f"{report.accuracy:.1f}"]
    for level in range(1, 6):
        value = report.per_difficulty.get(level)
        row.append(f"{value:.1f}" if value is not None else "-")
    row.append(f"{report.avg_steps:.1f}")
    widths = [max(len(h), len(v)) for h, v in zip(headers, row)]
    line1 = "  ".join(h.rjust(w) for h, w in zip(headers, widths))
    line2 = "  ".join(v.rjust(w) for v, w in zip(row, widths))
    extra = (
        f"completion_rate: {report.completion_rate:.1f}%   "
        f"episodes: {report.n_episodes}   aborted: {report.n_aborted}\n"
        f"backtracking ratio median {report.backtracking_ratio['median']:.2f} "
        f"(IQR {report.backtracking_ratio['q1']:.2f}..{report.backtracking_ratio['q3']:.2f})"
    )
    return f"{line1}\n{line2}\n{extra}\n"


def write_metrics_csv(report: MetricsReport, path: FilePath) -> None:
    flat = {
        "accuracy": report.accuracy,
        "completion_rate": report.completion_rate,
        "avg_steps": report.avg_steps,
        "n_episodes": report.n_episodes,
        "n_aborted": report.n_aborted,
        "backtracking_median": report.backtracking_ratio["median"],
        "backtracking_q1": report.backtracking_ratio["q1"],
        "backtracking_q3": report.backtracking_ratio["q3"],
    }
    for level in range(1, 6):
        flat[f"accuracy_d{level}"] = report.per_difficulty.get(level, "")
    for rule, value in sorted(report.per_rule.items()):
        flat[f"accuracy_rule_{rule.lower()}"] = value
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(flat.keys())
        writer.writerow(flat.values())


def _fig_accuracy_by_difficulty(report: MetricsReport, path: FilePath) -> None:
    levels = list(range(1, 6))
    values = [report.per_difficulty.get(lvl, 0.0) for lvl in levels]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar([f"D{lvl}" for lvl in levels], values, color="#2a9d8f")
    ax.set_ylabel("Accuracy (%)")
    ax.set_ylim(0, 100)
    ax.set_title("Accuracy by difficulty level")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _fig_backtracking(records: list[EpisodeRecord], path: FilePath) -> None:
    ratios = [r.total_actions / r.forward_edges
              for r in records if not r.aborted and r.forward_edges > 0]
    fig, ax = plt.subplots(figsize=(4, 3.2))
    if ratios:
        ax.boxplot([ratios], tick_labels=["episodes"], whis=1.5)
    ax.set_ylabel("steps / path edges")
    ax.set_title("Backtracking ratio")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _fig_status_breakdown(records: list[EpisodeRecord], path: FilePath) -> None:
    counts: dict[str, int] = {}
    for r in records:
        if not r.aborted:
            counts[r.status] = counts.get(r.status, 0) + 1
    fig, ax = plt.subplots(figsize=(5, 3.2))
    labels = sorted(counts)
    ax.bar(labels, [counts[k] for k in labels], color="#e76f51")
    ax.set_ylabel("episodes")
    ax.set_title("Terminal status breakdown")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report(report: MetricsReport, records: list[EpisodeRecord],
                 out_dir: FilePath | str) -> dict[str, str]:
    """Write metrics.json / metrics.csv / metrics.txt plus figures and
    the raw episode transcripts; returns the paths written."""
    out = FilePath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    figures = out / "figures"
    figures.mkdir(exist_ok=True)

    paths = {
        "json": out / "metrics.json",
        "csv": out / "metrics.csv",
        "txt": out / "metrics.txt",
        "episodes": out / "episodes.jsonl",
        "fig_difficulty": figures / "accuracy_by_difficulty.png",
        "fig_backtracking": figures / "backtracking_ratio.png",
        "fig_status": figures / "status_breakdown.png",
    }
    paths["json"].write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    write_metrics_csv(report, paths["csv"])
    paths["txt"].write_text(metrics_text_table(report))
    with open(paths["episodes"], "w") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict()) + "\n")
    _fig_accuracy_by_difficulty(report, paths["fig_difficulty"])
    _fig_backtracking(records, paths["fig_backtracking"])
    _fig_status_breakdown(records, paths["fig_status"])
    return {k: str(v) for k, v in paths.items()}
