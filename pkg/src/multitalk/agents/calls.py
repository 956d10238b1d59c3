"""Typed agent calls: prompt construction, backend completion, and parsing with
one automatic reprompt on format drift."""

from __future__ import annotations

from typing import Callable

from ..errors import MalformedAgentResponse
from ..geometry import WorkspaceRegion
from ..model import Feedback, Plan, PlannerOutput, Scene
from .backends import AgentBackend, Message
from .parsing import (
    AnalyzerVerdict,
    ResponseFormatError,
    parse_analyzer_response,
    parse_planner_response,
)
from .prompts import build_analyzer_prompt, build_planner_prompt

RETRY_SUFFIX = (
    "\n\nYour previous response could not be parsed: {error}\n"
    "Respond again with exactly one JSON object in the documented format."
)


def _call_with_retry(
    backend: AgentBackend,
    system: str,
    user: str,
    history: list[Message],
    parse: Callable[[str], object],
    on_retry: Callable[[str], None] | None,
):
    raw = backend.complete(system, user, history)
    try:
        return parse(raw), raw
    except ResponseFormatError as first_error:
        if on_retry is not None:
            on_retry(str(first_error))
        retry_user = user + RETRY_SUFFIX.format(error=first_error)
        raw2 = backend.complete(system, retry_user, history)
        try:
            return parse(raw2), raw2
        except ResponseFormatError as second_error:
            raise MalformedAgentResponse(
                f"unparseable response after one reprompt: {second_error}"
            ) from second_error


def planner_call(
    backend: AgentBackend,
    instruction: str,
    scene: Scene,
    feedback: Feedback,
    workspace: WorkspaceRegion,
    history: list[Message] | None = None,
    on_retry: Callable[[str], None] | None = None,
) -> tuple[PlannerOutput, str]:
    """One planner turn. Returns the parsed output and the raw response text."""
    system, user = build_planner_prompt(instruction, scene, feedback, workspace)
    return _call_with_retry(
        backend, system, user, history or [], parse_planner_response, on_retry
    )


def analyzer_call(
    backend: AgentBackend,
    instruction: str,
    plan: Plan,
    scene: Scene,
    workspace: WorkspaceRegion,
    history: list[Message] | None = None,
    on_retry: Callable[[str], None] | None = None,
) -> tuple[AnalyzerVerdict, str]:
    """One analyzer critique turn over a syntactically valid plan."""
    system, user = build_analyzer_prompt(instruction, plan, scene, workspace)
    return _call_with_retry(
        backend, system, user, history or [], parse_analyzer_response, on_retry
    )
