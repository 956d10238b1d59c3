"""The plan-refinement loop.

One session = one instruction driven to convergence (or exhaustion) through
planner calls whose output is routed, in order, through syntax validation, the
workspace-bounds gate, the analyzer critique gate, and the simulator gate.
Perception requests trigger a re-scan; clarifying questions block on the human
channel. Every event lands in an append-only transcript with monotone sequence
numbers.

Feedback sourcing follows the loop contract exactly: bounds and syntax
failures are attributed to the analyzer (mechanical pre-checks of the critique
role), re-scans to perception, answers to the human, and simulator verdicts to
the simulator. The iteration counter increments once per planner call,
including question and re-scan rounds.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Protocol

from .agents import (
    Critique,
    Feasible,
    analyzer_call,
    build_planner_prompt,
    planner_call,
)
from .errors import (
    BackendUnavailable,
    ConfigError,
    GuardMismatch,
    HumanTimeout,
    MalformedAgentResponse,
    ScriptExhausted,
)
from .geometry import DEFAULT_WORKSPACE, WorkspaceRegion, check_workspace_bounds
from .kinesim import ArmModel, SimConfig, SimSuccess, simulate_plan
from .model import (
    Feedback,
    FeedbackSource,
    Instructions,
    PerceptionRequest,
    Plan,
    PlannerOutput,
    QuestionHuman,
    Scene,
    SessionState,
    SessionStatus,
    TranscriptEvent,
    plan_to_records,
    scene_to_dict,
    validate_plan_syntax,
)
from .perceptor import SceneSource

Clock = Callable[[], float]


class Ablation(Enum):
    DISABLE_ANALYZER = "disable_analyzer"
    DISABLE_SIMULATOR = "disable_simulator"


@dataclass(frozen=True)
class SessionConfig:
    max_iterations: int = 10
    workspace: WorkspaceRegion = DEFAULT_WORKSPACE
    sim: SimConfig = field(default_factory=SimConfig)
    ablation: frozenset[Ablation] = frozenset()
    history_cap: int = 40
    human_timeout: float | None = None  # seconds; None blocks indefinitely

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.history_cap < 2:
            raise ConfigError("history_cap must be >= 2")
        object.__setattr__(self, "ablation", frozenset(self.ablation))


class HumanChannel(Protocol):
    def ask(self, questions: list[str], timeout: float | None) -> list[str]: ...


class ScriptedHuman:
    """Canned human: one answer list per question round, in order."""

    def __init__(self, rounds: list[list[str]]):
        self._rounds = [list(r) for r in rounds]
        self._index = 0

    def ask(self, questions: list[str], timeout: float | None) -> list[str]:
        if self._index >= len(self._rounds):
            raise HumanTimeout(f"no scripted answers left for round {self._index}")
        answers = self._rounds[self._index]
        self._index += 1
        if len(answers) != len(questions):
            raise ConfigError(
                f"scripted round {self._index - 1} has {len(answers)} answers "
                f"for {len(questions)} questions"
            )
        return answers


@dataclass(frozen=True, eq=False)
class SessionResult:
    status: SessionStatus
    final_plan: Plan | None
    iterations_used: int
    transcript: tuple[TranscriptEvent, ...]
    scene: Scene
    error: str = ""

    @property
    def converged(self) -> bool:
        return self.status is SessionStatus.CONVERGED


_TERMINAL = {
    SessionStatus.CONVERGED,
    SessionStatus.EXHAUSTED,
    SessionStatus.AWAITING_HUMAN_TIMEOUT,
    SessionStatus.AGENT_ERROR,
}


def record_event(
    state: SessionState,
    kind: str,
    body: dict,
    clock: Clock = time.time,
    listener: Callable[[TranscriptEvent], None] | None = None,
) -> TranscriptEvent:
    """Append one transcript event; sequence numbers are monotone and no event
    may follow a terminal status."""
    if state.transcript:
        last = state.transcript[-1]
        if last.kind == "status" and last.body.get("status") in {
            s.value for s in _TERMINAL
        }:
            raise ValueError("session transcript is closed")
    event = TranscriptEvent(
        seq=len(state.transcript), timestamp=clock(), kind=kind, body=body
    )
    state.transcript.append(event)
    if listener is not None:
        listener(event)
    return event


def _feedback_body(feedback: Feedback) -> dict:
    body = {"source": feedback.source.value, "text": feedback.text}
    if isinstance(feedback.payload, Scene):
        body["scene"] = scene_to_dict(feedback.payload)
    elif isinstance(feedback.payload, list):
        body["answers"] = list(feedback.payload)
    elif isinstance(feedback.payload, tuple):
        body["reasons"] = list(feedback.payload)
    return body


def _planner_output_body(output: PlannerOutput, retried: bool) -> dict:
    if isinstance(output, Instructions):
        body = {"variant": "instructions", "plan": plan_to_records(output.plan)}
    elif isinstance(output, QuestionHuman):
        body = {"variant": "question human", "questions": list(output.questions)}
    else:
        body = {"variant": "perception feedback", "reason": output.reason}
    if retried:
        body["retried"] = True
    return body


def run_session(
    instruction: str,
    source: SceneSource,
    planner_backend,
    analyzer_backend,
    human: HumanChannel,
    model: ArmModel,
    cfg: SessionConfig,
    clock: Clock = time.time,
    on_event: Callable[[TranscriptEvent], None] | None = None,
) -> SessionResult:
    """Drive one session to a terminal status. See the module docstring for
    the per-iteration contract."""
    if not instruction:
        raise ConfigError("instruction must be non-empty")

    state = SessionState(instruction=instruction, scene=source.snapshot())
    record = lambda kind, body: record_event(state, kind, body, clock, on_event)  # noqa: E731

    record(
        "status",
        {
            "status": SessionStatus.RUNNING.value,
            "instruction": instruction,
            "scene": scene_to_dict(state.scene),
            "max_iterations": cfg.max_iterations,
            "ablation": sorted(a.value for a in cfg.ablation),
            "workspace": cfg.workspace.to_dict(),
        },
    )

    feedback = Feedback.none()
    history: list[dict] = []
    last_plan: Plan | None = None
    iterations_used = 0

    def finish(status: SessionStatus, plan: Plan | None, error: str = "") -> SessionResult:
        state.status = status
        body = {"status": status.value, "iterations_used": iterations_used}
        if plan is not None:
            body["final_plan"] = plan_to_records(plan)
        if error:
            body["error"] = error
        record("status", body)
        return SessionResult(
            status=status,
            final_plan=plan,
            iterations_used=iterations_used,
            transcript=tuple(state.transcript),
            scene=state.scene,
            error=error,
        )

    def remember_turn(user_prompt: str, raw_response: str):
        history.append({"role": "user", "content": user_prompt})
        history.append({"role": "assistant", "content": raw_response})
        if len(history) > cfg.history_cap:
            # oldest dropped first, the opening instruction prompt retained
            del history[1 : len(history) - (cfg.history_cap - 1)]

    try:
        while state.iteration < cfg.max_iterations:
            state.last_feedback = feedback
            retried = False

            def note_retry(err: str):
                nonlocal retried
                retried = True

            output, raw = planner_call(
                planner_backend,
                instruction,
                state.scene,
                feedback,
                cfg.workspace,
                history=history,
                on_retry=note_retry,
            )
            iterations_used = state.iteration + 1
            _, user_prompt = build_planner_prompt(
                instruction, state.scene, feedback, cfg.workspace
            )
            remember_turn(user_prompt, raw)
            state.last_output = output
            record("planner_output", _planner_output_body(output, retried))

            if isinstance(output, PerceptionRequest):
                state.scene = source.rescan()
                feedback = Feedback(
                    source=FeedbackSource.PERCEPTION,
                    text=(
                        f"re-scanned from viewpoint {state.scene.viewpoint_id}: "
                        f"{len(state.scene.objects)} objects detected"
                    ),
                    payload=state.scene,
                )
                record("feedback", _feedback_body(feedback))

            elif isinstance(output, QuestionHuman):
                questions = list(output.questions)
                record("question", {"questions": questions})
                state.status = SessionStatus.AWAITING_HUMAN
                record("status", {"status": SessionStatus.AWAITING_HUMAN.value})
                try:
                    answers = human.ask(questions, cfg.human_timeout)
                except HumanTimeout as exc:
                    return finish(
                        SessionStatus.AWAITING_HUMAN_TIMEOUT, last_plan, str(exc)
                    )
                if len(answers) != len(questions):
                    raise ConfigError(
                        f"human channel returned {len(answers)} answers "
                        f"for {len(questions)} questions"
                    )
                state.status = SessionStatus.RUNNING
                record("answer", {"answers": list(answers)})
                record("status", {"status": SessionStatus.RUNNING.value})
                feedback = Feedback(
                    source=FeedbackSource.HUMAN,
                    text="; ".join(
                        f"Q: {q} A: {a}" for q, a in zip(questions, answers)
                    ),
                    payload=list(answers),
                )
                record("feedback", _feedback_body(feedback))

            elif isinstance(output, Instructions):
                plan = output.plan
                last_plan = plan

                syntax_errors = validate_plan_syntax(plan, state.scene)
                if syntax_errors:
                    feedback = Feedback(
                        source=FeedbackSource.ANALYZER,
                        text="the plan has errors: " + "; ".join(syntax_errors),
                    )
                    record("feedback", _feedback_body(feedback))
                    state.iteration += 1
                    continue

                bounds_text = check_workspace_bounds(plan, state.scene, cfg.workspace)
                if "out of bounds" in bounds_text:
                    feedback = Feedback(
                        source=FeedbackSource.ANALYZER, text=bounds_text
                    )
                    record("feedback", _feedback_body(feedback))
                    state.iteration += 1
                    continue

                if Ablation.DISABLE_ANALYZER not in cfg.ablation:
                    verdict, _ = analyzer_call(
                        analyzer_backend,
                        instruction,
                        plan,
                        state.scene,
                        cfg.workspace,
                    )
                else:
                    verdict = Feasible()

                if isinstance(verdict, Critique):
                    feedback = Feedback(
                        source=FeedbackSource.ANALYZER,
                        text="; ".join(verdict.reasons),
                        payload=verdict.reasons,
                    )
                    record("feedback", _feedback_body(feedback))
                    state.iteration += 1
                    continue

                if Ablation.DISABLE_ANALYZER not in cfg.ablation:
                    record(
                        "feedback",
                        {"source": FeedbackSource.ANALYZER.value, "text": "feasible"},
                    )

                if Ablation.DISABLE_SIMULATOR not in cfg.ablation:
                    sim_verdict, sim_text = simulate_plan(
                        plan, state.scene, model, cfg.sim, cfg.workspace
                    )
                    if isinstance(sim_verdict, SimSuccess):
                        record("verdict", {"result": "success"})
                        return finish(SessionStatus.CONVERGED, plan)
                    record(
                        "verdict",
                        {
                            "result": "failure",
                            "kind": sim_verdict.kind.value,
                            "step_index": sim_verdict.step_index,
                            "detail": sim_verdict.detail,
                            "suggestion": sim_verdict.suggestion,
                        },
                    )
                    feedback = Feedback(
                        source=FeedbackSource.SIMULATOR,
                        text=sim_text,
                        payload=sim_verdict,
                    )
                    record("feedback", _feedback_body(feedback))
                else:
                    record("verdict", {"result": "skipped"})
                    return finish(SessionStatus.CONVERGED, plan)

            state.iteration += 1

        return finish(SessionStatus.EXHAUSTED, last_plan)

    except (MalformedAgentResponse, BackendUnavailable, ScriptExhausted,
            GuardMismatch) as exc:
        return finish(
            SessionStatus.AGENT_ERROR, last_plan, f"{type(exc).__name__}: {exc}"
        )
