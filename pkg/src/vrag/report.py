"""Evaluation report rendering: JSON, an aligned text table, CSV, and a bar
chart rendered to PNG next to the delimited outputs.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import DIMENSIONS, WINRATE, EvalReport


def render_json(report: EvalReport) -> str:
    return json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"


def _table(rows: list[list[str]]) -> str:
    widths = [max(len(row[col]) for row in rows) for col in range(len(rows[0]))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * width for width in widths))
    return "\n".join(lines) + "\n"


def render_table(report: EvalReport) -> str:
    if report.protocol == WINRATE:
        rows = [["Dimension", "A win %", "B win %", "Valid"]]
        for dimension in DIMENSIONS:
            agg = report.dimensions[dimension]
            rows.append([dimension, f"{agg['a_win_pct']}%", f"{agg['b_win_pct']}%",
                         str(agg["valid"])])
    else:
        rows = [["Dimension", "Mean score", "Queries"]]
        for dimension in DIMENSIONS:
            agg = report.dimensions[dimension]
            rows.append([dimension, agg["mean"], str(agg["queries"])])
    header = (f"protocol: {report.protocol}  judge: {report.judge_model}  "
              f"judgments: {report.counts['judgments']} "
              f"(valid {report.counts['valid']}, "
              f"discarded {report.counts['discarded']})\n")
    return header + _table(rows)


def render_csv(report: EvalReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if report.protocol == WINRATE:
        writer.writerow(["dimension", "a_win_pct", "b_win_pct", "a_wins", "b_wins",
                         "valid"])
        for dimension in DIMENSIONS:
            agg = report.dimensions[dimension]
            writer.writerow([dimension, agg["a_win_pct"], agg["b_win_pct"],
                             agg["a_wins"], agg["b_wins"], agg["valid"]])
    else:
        writer.writerow(["dimension", "mean", "queries", "scores"])
        for dimension in DIMENSIONS:
            agg = report.dimensions[dimension]
            writer.writerow([dimension, agg["mean"], agg["queries"], agg["scores"]])
    return buffer.getvalue()


def render_figure(report: EvalReport, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    positions = range(len(DIMENSIONS))
    if report.protocol == WINRATE:
        a_values = [float(report.dimensions[d]["a_win_pct"]) for d in DIMENSIONS]
        b_values = [float(report.dimensions[d]["b_win_pct"]) for d in DIMENSIONS]
        width = 0.38
        ax.bar([p - width / 2 for p in positions], a_values, width, label="A")
        ax.bar([p + width / 2 for p in positions], b_values, width, label="B")
        ax.set_ylabel("win %")
        ax.set_ylim(0, 100)
        ax.legend()
    else:
        means = [float(report.dimensions[d]["mean"]) for d in DIMENSIONS]
        ax.bar(list(positions), means)
        ax.set_ylabel("mean score (1-5)")
        ax.set_ylim(0, 5)
    ax.set_xticks(list(positions))
    ax.set_xticklabels(DIMENSIONS, rotation=20, ha="right")
    ax.set_title(f"{report.protocol} evaluation")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report_files(report: EvalReport, out_dir: Path,
                       basename: str = "report") -> dict[str, Path]:
    """Write report.<json|txt|csv|png> under out_dir; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out_dir / f"{basename}.json",
        "txt": out_dir / f"{basename}.txt",
        "csv": out_dir / f"{basename}.csv",
        "png": out_dir / f"{basename}.png",
    }
    paths["json"].write_text(render_json(report), encoding="utf-8")
    paths["txt"].write_text(render_table(report), encoding="utf-8")
    paths["csv"].write_text(render_csv(report), encoding="utf-8")
    render_figure(report, paths["png"])
    return paths
