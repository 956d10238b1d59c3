"""Benchmark harness: tasks, goal predicates, deterministic planner stand-ins,
the grid runner, and report rendering."""

from .oracle import ApproveAllAnalyzer, BenchHuman, DirectSwapPlanner, OraclePlanner
from .predicates import goal_predicate
from .report import report_csv, report_table, write_report
from .runner import (
    ABLATION_LABELS,
    ABLATION_MODES,
    ABLATION_ORDER,
    BenchReport,
    RunRecord,
    run_benchmark,
    run_one,
)
from .tasks import OBJECT_CATALOG, TASK_ORDER, TASKS, TaskSpec, build_instruction, build_task_scene, get_task

__all__ = [
    "ApproveAllAnalyzer", "BenchHuman", "DirectSwapPlanner", "OraclePlanner",
    "goal_predicate", "report_csv", "report_table", "write_report",
    "ABLATION_LABELS", "ABLATION_MODES", "ABLATION_ORDER",
    "BenchReport", "RunRecord", "run_benchmark", "run_one",
    "OBJECT_CATALOG", "TASK_ORDER", "TASKS", "TaskSpec",
    "build_instruction", "build_task_scene", "get_task",
]
