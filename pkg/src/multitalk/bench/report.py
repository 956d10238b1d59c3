"""Benchmark report rendering: a raw per-run CSV and a success-rate table with
one column per ablation mode."""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .runner import ABLATION_LABELS, ABLATION_ORDER, BenchReport
from .tasks import TASK_ORDER, TASKS

CSV_COLUMNS = [
    "task", "config", "repeat", "ablation", "scene_seed", "n_objects", "status",
    "iterations", "converged", "executable", "predicate_passed", "success",
    "failure_kinds", "error",
]


def report_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in report.rows:
        writer.writerow([
            r.task_id, r.config_index, r.repeat, r.ablation, r.scene_seed,
            r.n_objects, r.status, r.iterations, int(r.converged),
            int(r.executable), int(r.predicate_passed), int(r.success),
            ";".join(r.failure_kinds), r.error,
        ])
    return buf.getvalue()


def report_table(report: BenchReport) -> str:
    tasks = [t for t in TASK_ORDER if any(r.task_id == t for r in report.rows)]
    ablations = [a for a in ABLATION_ORDER if any(r.ablation == a for r in report.rows)]
    headers = ["Task"] + [ABLATION_LABELS[a] for a in ablations]

    rows = []
    for task_id in tasks:
        label = f"{task_id}: {TASKS[task_id].description}"
        cells = [label]
        for ablation in ablations:
            successes, runs = report.cell(task_id, ablation)
            cells.append(f"{successes / runs:.1f}" if runs else "-")
        rows.append(cells)

    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = []
    total_runs = len(report.rows)
    lines.append(
        f"Success rate by task and ablation "
        f"({total_runs} runs, backend={report.backend}, seed={report.seed})"
    )
    sep = "-+-".join("-" * w for w in widths)
    lines.append(" | ".join(h.ljust(w) for h, w in zip(headers, widths)))
    lines.append(sep)
    for cells in rows:
        lines.append(" | ".join(c.ljust(w) for c, w in zip(cells, widths)))
    return "\n".join(lines) + "\n"


def write_report(report: BenchReport, out_dir: str | Path) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "report.csv"
    txt_path = out / "report.txt"
    csv_path.write_text(report_csv(report))
    txt_path.write_text(report_table(report))
    return csv_path, txt_path
