"""Benchmark grid execution: tasks x configurations x repeats x ablations.

Scoring separates three concerns: did the loop converge, does the final plan
actually execute cleanly when re-simulated with every gate enabled, and does
the resulting world satisfy the task's goal predicate. A run succeeds only
when all three hold; an inexecutable plan leaves the world unchanged, so goal
predicates fail naturally. Individual run errors are recorded, never fatal.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ..agents import AgentScript, LiveBackend, ScriptedBackend
from ..errors import MultitalkError
from ..geometry import DEFAULT_WORKSPACE
from ..kinesim import ArmModel, SimConfig, SimSuccess, default_model, simulate_plan
from ..model import SessionStatus, validate_plan_syntax
from ..orchestrator import Ablation, SessionConfig, run_session
from ..perceptor import SyntheticSource, apply_world_update
from .oracle import ApproveAllAnalyzer, BenchHuman, DirectSwapPlanner, OraclePlanner
from .predicates import goal_predicate
from .tasks import TASK_ORDER, build_instruction, build_task_scene, get_task

ABLATION_MODES: dict[str, frozenset[Ablation]] = {
    "full": frozenset(),
    "planner_analyzer": frozenset({Ablation.DISABLE_SIMULATOR}),
    "planner_simulator": frozenset({Ablation.DISABLE_ANALYZER}),
    "planner": frozenset({Ablation.DISABLE_ANALYZER, Ablation.DISABLE_SIMULATOR}),
}
ABLATION_ORDER = ["full", "planner_analyzer", "planner_simulator", "planner"]
ABLATION_LABELS = {
    "full": "Overall Framework",
    "planner_analyzer": "Planner + Analyzer",
    "planner_simulator": "Planner + Simulator",
    "planner": "Planner",
}

BENCH_SCENE_CLEARANCE = 0.04


@dataclass(frozen=True)
class RunRecord:
    task_id: str
    config_index: int
    repeat: int
    ablation: str
    scene_seed: int
    n_objects: int
    status: str
    iterations: int
    converged: bool
    executable: bool
    predicate_passed: bool
    success: bool
    failure_kinds: tuple[str, ...]
    error: str = ""


@dataclass(frozen=True)
class BenchReport:
    rows: tuple[RunRecord, ...]
    seed: int
    backend: str

    def cell(self, task_id: str, ablation: str) -> tuple[int, int]:
        hits = [r for r in self.rows if r.task_id == task_id and r.ablation == ablation]
        return sum(r.success for r in hits), len(hits)

    def success_rate(self, task_id: str, ablation: str) -> float | None:
        successes, runs = self.cell(task_id, ablation)
        return successes / runs if runs else None


def _make_backends(backend_spec: str, task_id: str):
    if backend_spec == "oracle":
        return OraclePlanner(), ApproveAllAnalyzer()
    if backend_spec == "direct-swap":
        return DirectSwapPlanner(), ApproveAllAnalyzer()
    if backend_spec.startswith("scripted:"):
        directory = Path(backend_spec.split(":", 1)[1])
        planner = ScriptedBackend(AgentScript.from_file(directory / f"{task_id}.planner.json"))
        analyzer_path = directory / f"{task_id}.analyzer.json"
        if analyzer_path.exists():
            analyzer = ScriptedBackend(AgentScript.from_file(analyzer_path))
        else:
            analyzer = ApproveAllAnalyzer()
        return planner, analyzer
    if backend_spec == "live":
        import os

        key_var = os.environ.get("MULTITALK_LLM_KEY_VAR", "MULTITALK_LLM_KEY")
        endpoint = os.environ.get("MULTITALK_LLM_ENDPOINT", "https://api.openai.com/v1")
        model_name = os.environ.get("MULTITALK_LLM_MODEL", "gpt-4o")
        credential = os.environ.get(key_var, "")
        live = LiveBackend(endpoint, model_name, credential)
        return live, live
    raise MultitalkError(f"unknown backend spec {backend_spec!r}")


def _scene_seed(seed: int, task_index: int, config_index: int) -> int:
    return (seed * 8 + task_index) * 64 + config_index


def _counting_clock():
    counter = itertools.count()
    return lambda: float(next(counter))


def run_one(
    task_id: str,
    config_index: int,
    repeat: int,
    ablation: str,
    seed: int,
    backend_spec: str,
    model: ArmModel,
    sim: SimConfig,
    max_iterations: int = 10,
    transcript_dir: Path | None = None,
) -> RunRecord:
    task = get_task(task_id)
    scene_seed = _scene_seed(seed, TASK_ORDER.index(task_id), config_index)
    scene = build_task_scene(task, scene_seed, DEFAULT_WORKSPACE,
                             min_clearance=BENCH_SCENE_CLEARANCE)
    instruction = build_instruction(task, scene, scene_seed)

    planner, analyzer = _make_backends(backend_spec, task_id)
    human = BenchHuman(instruction, scene)
    cfg = SessionConfig(
        max_iterations=max_iterations,
        workspace=DEFAULT_WORKSPACE,
        sim=sim,
        ablation=ABLATION_MODES[ablation],
    )

    try:
        result = run_session(
            instruction,
            SyntheticSource(ground_truth=scene),
            planner,
            analyzer,
            human,
            model,
            cfg,
            clock=_counting_clock(),
        )
    except MultitalkError as exc:
        return RunRecord(
            task_id=task_id, config_index=config_index, repeat=repeat,
            ablation=ablation, scene_seed=scene_seed, n_objects=len(scene.objects),
            status="error", iterations=0, converged=False, executable=False,
            predicate_passed=False, success=False, failure_kinds=(),
            error=f"{type(exc).__name__}: {exc}",
        )

    executable = False
    final_scene = scene
    if result.final_plan is not None and not validate_plan_syntax(result.final_plan, scene):
        verdict, _ = simulate_plan(result.final_plan, scene, model, sim,
                                   DEFAULT_WORKSPACE)
        executable = isinstance(verdict, SimSuccess)
        if executable:
            source = SyntheticSource(ground_truth=scene)
            final_scene = apply_world_update(source, result.final_plan)

    predicate_passed = goal_predicate(
        task_id, scene, final_scene, result.transcript,
        tolerance=sim.placement_tolerance,
    )
    converged = result.status is SessionStatus.CONVERGED
    success = converged and executable and predicate_passed

    failure_kinds = tuple(
        e.body["kind"]
        for e in result.transcript
        if e.kind == "verdict" and e.body.get("result") == "failure"
    )

    if transcript_dir is not None:
        transcript_dir.mkdir(parents=True, exist_ok=True)
        name = f"{task_id}_c{config_index}_r{repeat}_{ablation}.jsonl"
        with open(transcript_dir / name, "w") as fh:
            for e in result.transcript:
                fh.write(json.dumps(e.to_dict(), sort_keys=True) + "\n")

    return RunRecord(
        task_id=task_id, config_index=config_index, repeat=repeat,
        ablation=ablation, scene_seed=scene_seed, n_objects=len(scene.objects),
        status=result.status.value, iterations=result.iterations_used,
        converged=converged, executable=executable,
        predicate_passed=predicate_passed, success=success,
        failure_kinds=failure_kinds, error=result.error,
    )


def run_benchmark(
    tasks: list[str] | None = None,
    n_configs: int = 5,
    repeats: int = 2,
    ablations: list[str] | None = None,
    backend: str = "oracle",
    seed: int = 0,
    model: ArmModel | None = None,
    sim: SimConfig | None = None,
    workers: int = 1,
    transcript_dir: Path | None = None,
) -> BenchReport:
    """Run the full grid; defaults reproduce the 8x5x2x4 = 320-run layout."""
    tasks = tasks or list(TASK_ORDER)
    ablations = ablations or list(ABLATION_ORDER)
    model = model or default_model()
    sim = sim or SimConfig()

    grid = [
        (task_id, config_index, repeat, ablation)
        for task_id in tasks
        for config_index in range(n_configs)
        for repeat in range(repeats)
        for ablation in ablations
    ]

    def job(cell):
        task_id, config_index, repeat, ablation = cell
        return run_one(
            task_id, config_index, repeat, ablation, seed, backend, model, sim,
            transcript_dir=transcript_dir,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, grid))
    else:
        rows = [job(cell) for cell in grid]

    return BenchReport(rows=tuple(rows), seed=seed, backend=backend)
