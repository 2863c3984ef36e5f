"""Run reports: delimited metrics plus rendered figures."""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .study import RunMetrics


def write_report(metrics: RunMetrics, out_dir, name: str = "run") -> dict[str, str]:
    """Write metrics.json, metrics.csv, and the figures for one run.

    Returns a map of artifact kind -> path.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    json_path = os.path.join(out_dir, f"{name}_metrics.json")
    with open(json_path, "w") as f:
        json.dump(metrics.to_dict(), f, indent=2)
    paths["json"] = json_path

    csv_path = os.path.join(out_dir, f"{name}_metrics.csv")
    with open(csv_path, "w") as f:
        f.write(metrics.csv_header() + "\n")
        f.write(metrics.csv_row() + "\n")
    paths["csv"] = csv_path

    paths["figure"] = _completion_figure(metrics, out_dir, name)
    return paths


def _completion_figure(metrics: RunMetrics, out_dir, name: str) -> str:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5), width_ratios=[2, 1])

    labels = [f"target {i}" for i in range(len(metrics.completion_times))]
    values = [t if t is not None else 0.0 for t in metrics.completion_times]
    colors = ["#4878a8" if t is not None else "#c44e52" for t in metrics.completion_times]
    ax1.bar(labels, values, color=colors)
    for i, t in enumerate(metrics.completion_times):
        if t is None:
            ax1.text(i, 0.1, "timeout", ha="center", rotation=90, color="#c44e52")
    ax1.set_ylabel("completion time (s)")
    ax1.set_title("Time from target appearance to settled placement")

    summary = [
        ("hints used", metrics.hints_used),
        ("grasps", metrics.grasp_count),
        ("releases", metrics.release_count),
    ]
    if metrics.recall_score is not None:
        summary.append(("recall score", round(metrics.recall_score, 3)))
    ax2.axis("off")
    ax2.table(
        cellText=[[k, str(v)] for k, v in summary],
        loc="center",
        cellLoc="left",
        colWidths=[0.6, 0.4],
    )
    ax2.set_title("Run summary")

    fig.tight_layout()
    path = os.path.join(out_dir, f"{name}_completion.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
