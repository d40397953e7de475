"""Report serialization (JSON, CSV) and figure rendering.

The JSON report carries recall/precision (and optional per-class, entity,
and nDCG blocks) keyed by task and K; the CSV export is one row per
(task, K). Figures are precision-recall trade-off curves and per-class
bars, rendered headless to image files next to the delimited output.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import MetricReport


def build_report(report: MetricReport) -> dict:
    """JSON-ready object for a metric report."""
    per_class: dict = {}
    if report.per_class or report.mean_recall_at or report.mean_precision_at:
        per_class = {
            "classes": {
                cls: {
                    metric: {str(k): value for k, value in values.items()}
                    for metric, values in entry.items()
                }
                for cls, entry in report.per_class.items()
            },
            "mean_recall": {str(k): v for k, v in report.mean_recall_at.items()},
            "mean_precision": {str(k): v for k, v in report.mean_precision_at.items()},
        }
    return {
        "task": report.task,
        "k": list(report.ks),
        "recall": {str(k): v for k, v in report.recall_at.items()},
        "precision": {str(k): v for k, v in report.precision_at.items()},
        "ndcg": {str(p): v for p, v in report.ndcg.items()},
        "per_class": per_class,
        "entity": report.entity,
    }


def dump_json(payload: dict, path: Optional[str | Path] = None) -> None:
    """Write a JSON payload deterministically (sorted keys, two-space
    indent, trailing newline); None means stdout."""
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def write_report_csv(report: MetricReport, path: str | Path) -> None:
    """One row per (task, K); mean columns are empty without per-class data."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["task", "k", "recall", "precision", "mean_recall", "mean_precision"]
        )
        for k in report.ks:
            writer.writerow(
                [
                    report.task,
                    k,
                    report.recall_at[k],
                    report.precision_at[k],
                    report.mean_recall_at.get(k, ""),
                    report.mean_precision_at.get(k, ""),
                ]
            )


def write_pr_curve_csv(
    points: Sequence[tuple[int, float, float]], path: str | Path
) -> None:
    """Curve points as k,precision,recall rows."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["k", "precision", "recall"])
        for k, precision, recall in points:
            writer.writerow([k, precision, recall])


def render_pr_curve(
    points: Sequence[tuple[int, float, float]],
    path: str | Path,
    label: Optional[str] = None,
) -> None:
    """Precision-recall trade-off figure with K annotations."""
    recalls = [r for _, _, r in points]
    precisions = [p for _, p, _ in points]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(recalls, precisions, marker="o", label=label)
    for k, precision, recall in points:
        ax.annotate(
            f"K={k}",
            (recall, precision),
            textcoords="offset points",
            xytext=(5, 5),
            fontsize=8,
        )
    ax.set_xlabel("Recall@K")
    ax.set_ylabel("Precision@K")
    ax.set_xlim(0.0, 1.05)
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    if label:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_per_class_bars(
    report: MetricReport, k: int, path: str | Path
) -> None:
    """Per-predicate recall/precision bars at one K, best recall first."""
    rows = []
    for cls, entry in report.per_class.items():
        recall = entry.get("recall", {}).get(k)
        precision = entry.get("precision", {}).get(k)
        rows.append((cls, recall, precision))
    rows.sort(key=lambda row: -(row[1] if row[1] is not None else -1.0))
    names = [row[0] for row in rows]
    recalls = [row[1] if row[1] is not None else 0.0 for row in rows]
    precisions = [row[2] if row[2] is not None else 0.0 for row in rows]
    positions = range(len(rows))
    width = 0.4
    fig, ax = plt.subplots(figsize=(max(6, 0.45 * len(rows)), 4))
    ax.bar([p - width / 2 for p in positions], recalls, width, label=f"R@{k}")
    ax.bar([p + width / 2 for p in positions], precisions, width, label=f"P@{k}")
    ax.set_xticks(list(positions))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=8)
    ax.set_ylabel("score")
    ax.set_ylim(0.0, 1.05)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
