"""Parsing of agent responses into typed outputs.

Responses must be a single JSON object in the documented grammar; anything
else raises ResponseFormatError with a reason suitable for a reprompt.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

from ..errors import MultitalkError, PlanParseError
from ..model import Instructions, PerceptionRequest, PlannerOutput, QuestionHuman, plan_from_records


class ResponseFormatError(MultitalkError):
    """Response text does not match the agent grammar (retryable once)."""


@dataclass(frozen=True)
class Feasible:
    pass


@dataclass(frozen=True)
class Critique:
    reasons: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "reasons", tuple(self.reasons))
        if not self.reasons:
            raise ValueError("Critique.reasons must be non-empty")


AnalyzerVerdict = Union[Feasible, Critique]

APPROVAL_TOKEN = "feasible"


def _load_object(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ResponseFormatError(f"response is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ResponseFormatError(
            f"response must be a JSON object, got {type(doc).__name__}"
        )
    return doc


def parse_planner_response(text: str) -> PlannerOutput:
    doc = _load_object(text)
    kind = doc.get("type")
    if kind == "instructions":
        if "plan" not in doc:
            raise ResponseFormatError("missing 'plan' field for type 'instructions'")
        try:
            plan = plan_from_records(doc["plan"])
        except PlanParseError as exc:
            raise ResponseFormatError(f"bad plan: {exc}") from exc
        return Instructions(plan=plan)
    if kind == "question human":
        questions = doc.get("questions")
        if (
            not isinstance(questions, list)
            or not questions
            or not all(isinstance(q, str) and q.strip() for q in questions)
        ):
            raise ResponseFormatError(
                "'question human' needs a non-empty list of non-empty questions"
            )
        return QuestionHuman(questions=tuple(questions))
    if kind == "perception feedback":
        reason = doc.get("reason", "")
        if not isinstance(reason, str):
            raise ResponseFormatError("'reason' must be a string")
        return PerceptionRequest(reason=reason)
    raise ResponseFormatError(
        f"unknown response type {kind!r}; expected 'instructions', "
        "'question human', or 'perception feedback'"
    )


def parse_analyzer_response(text: str) -> AnalyzerVerdict:
    doc = _load_object(text)
    verdict = doc.get("verdict")
    if verdict == APPROVAL_TOKEN:
        return Feasible()
    if verdict == "revise":
        reasons = doc.get("reasons")
        if (
            not isinstance(reasons, list)
            or not reasons
            or not all(isinstance(r, str) and r.strip() for r in reasons)
        ):
            raise ResponseFormatError(
                "'revise' needs a non-empty list of non-empty reasons"
            )
        return Critique(reasons=tuple(reasons))
    raise ResponseFormatError(
        f"unknown verdict {verdict!r}; expected 'feasible' or 'revise'"
    )
