"""Domain types shared by every module: scenes, plans, agent outputs, feedback,
session state, and their canonical serialization.

All value types are immutable dataclasses; coordinates are plain float tuples
in the workspace frame (right-handed, origin at the robot base, z up, table
surface at z = 0, all lengths in meters).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Union

from .errors import PlanParseError

Vec3 = tuple[float, float, float]


def _as_vec3(value: Any, what: str) -> Vec3:
    try:
        x, y, z = (float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{what} must be a 3-vector of numbers, got {value!r}") from exc
    return (x, y, z)


def fmt_float(v: float) -> str:
    """Render a float with full precision but at least three decimals."""
    s = repr(float(v))
    if "e" in s or "E" in s:
        return s
    if "." not in s:
        return f"{v:.3f}"
    decimals = len(s) - s.index(".") - 1
    return f"{v:.3f}" if decimals < 3 else s


def fmt_vec3(v: Vec3, precision: int = 3) -> str:
    """Human-facing vector rendering used in feedback text, e.g. [0.450, 0.000, 0.037]."""
    return "[" + ", ".join(f"{c:.{precision}f}" for c in v) + "]"


# ---------------------------------------------------------------------------
# Scene types


@dataclass(frozen=True)
class ObjectObservation:
    """A detected object: axis-aligned box center and per-axis half sizes."""

    id: str
    label: str
    center: Vec3
    half_extents: Vec3

    def __post_init__(self):
        if not self.id:
            raise ValueError("object id must be non-empty")
        if not self.label:
            raise ValueError(f"object {self.id!r}: label must be non-empty")
        object.__setattr__(self, "center", _as_vec3(self.center, "center"))
        object.__setattr__(self, "half_extents", _as_vec3(self.half_extents, "half_extents"))
        if any(h <= 0 for h in self.half_extents):
            raise ValueError(f"object {self.id!r}: half_extents must be positive")

    @property
    def top(self) -> float:
        return self.center[2] + self.half_extents[2]


@dataclass(frozen=True)
class Scene:
    objects: tuple[ObjectObservation, ...]
    viewpoint_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        ids = [o.id for o in self.objects]
        if len(ids) != len(set(ids)):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate object ids in scene: {dup}")

    def get(self, object_id: str) -> ObjectObservation | None:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        return None

    def ids(self) -> set[str]:
        return {o.id for o in self.objects}


def scene_to_dict(scene: Scene) -> dict:
    return {
        "objects": [
            {
                "id": o.id,
                "label": o.label,
                "center": list(o.center),
                "half_extents": list(o.half_extents),
            }
            for o in scene.objects
        ],
        "viewpoint_id": scene.viewpoint_id,
    }


def scene_from_dict(doc: dict) -> Scene:
    objects = tuple(
        ObjectObservation(
            id=entry["id"],
            label=entry["label"],
            center=_as_vec3(entry["center"], "center"),
            half_extents=_as_vec3(entry["half_extents"], "half_extents"),
        )
        for entry in doc.get("objects", [])
    )
    return Scene(objects=objects, viewpoint_id=int(doc.get("viewpoint_id", 0)))


# ---------------------------------------------------------------------------
# Plan types


@dataclass(frozen=True)
class Grasp:
    object_id: str

    def __post_init__(self):
        if not self.object_id:
            raise ValueError("Grasp.object_id must be non-empty")


@dataclass(frozen=True)
class Move:
    target: Vec3

    def __post_init__(self):
        object.__setattr__(self, "target", _as_vec3(self.target, "Move.target"))
        if not all(math.isfinite(c) for c in self.target):
            raise ValueError("Move.target must be finite")


@dataclass(frozen=True)
class Home:
    pass


Action = Union[Grasp, Move, Home]


@dataclass(frozen=True)
class Plan:
    steps: tuple[Action, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self) -> int:
        return len(self.steps)


def validate_plan_syntax(plan: Plan, scene: Scene) -> list[str]:
    """Mechanical plan checks: unknown object references, non-finite targets,
    and grasping while an object is already held (single-gripper robot; a Move
    or Home ends the hold).

    Returns an empty list when the plan is well-formed. Step numbers in the
    messages are 1-based.
    """
    errors: list[str] = []
    known = scene.ids()
    holding = False
    for i, step in enumerate(plan.steps, start=1):
        if isinstance(step, Grasp):
            if step.object_id not in known:
                errors.append(f"unknown object id '{step.object_id}' at step {i}")
            if holding:
                errors.append(f"grasp while already holding at step {i}")
            holding = True
        elif isinstance(step, Move):
            if not all(math.isfinite(c) for c in step.target):
                errors.append(f"non-finite move target at step {i}")
            holding = False
        elif isinstance(step, Home):
            holding = False
        else:  # pragma: no cover - prevented by the Action union
            errors.append(f"unknown action at step {i}")
    return errors


def serialize_plan(plan: Plan) -> str:
    """Canonical plan text: a JSON list of step records.

    Move targets keep full precision but render with at least three decimals.
    """
    parts = []
    for step in plan.steps:
        if isinstance(step, Grasp):
            parts.append('{"action":"grasp","object":%s}' % json.dumps(step.object_id))
        elif isinstance(step, Move):
            coords = ",".join(fmt_float(c) for c in step.target)
            parts.append('{"action":"move","target":[%s]}' % coords)
        else:
            parts.append('{"action":"home"}')
    return "[" + ",".join(parts) + "]"


def plan_from_records(records: Any) -> Plan:
    """Build a Plan from already-decoded step records (the canonical list form)."""
    if not isinstance(records, list):
        raise PlanParseError(f"plan must be a list of step records, got {type(records).__name__}")
    steps: list[Action] = []
    for i, rec in enumerate(records, start=1):
        if not isinstance(rec, dict):
            raise PlanParseError(f"step {i} must be an object, got {type(rec).__name__}", step=i)
        action = rec.get("action")
        if action == "grasp":
            if "object" not in rec:
                raise PlanParseError(f"missing field 'object' at step {i}", step=i)
            obj = rec["object"]
            if not isinstance(obj, str) or not obj:
                raise PlanParseError(f"field 'object' at step {i} must be a non-empty string", step=i)
            steps.append(Grasp(obj))
        elif action == "move":
            if "target" not in rec:
                raise PlanParseError(f"missing field 'target' at step {i}", step=i)
            target = rec["target"]
            if not isinstance(target, list) or len(target) != 3:
                raise PlanParseError(f"field 'target' at step {i} must be [x, y, z]", step=i)
            if not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in target):
                raise PlanParseError(f"non-numeric coordinate in 'target' at step {i}", step=i)
            steps.append(Move(tuple(float(c) for c in target)))
        elif action == "home":
            steps.append(Home())
        else:
            raise PlanParseError(f"unknown action {action!r} at step {i}", step=i)
    return Plan(tuple(steps))


def parse_plan(text: str) -> Plan:
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanParseError(f"plan text is not valid JSON: {exc}") from exc
    return plan_from_records(records)


def plan_to_records(plan: Plan) -> list[dict]:
    return json.loads(serialize_plan(plan))


# ---------------------------------------------------------------------------
# Agent output and feedback types


@dataclass(frozen=True)
class Instructions:
    plan: Plan


@dataclass(frozen=True)
class QuestionHuman:
    questions: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "questions", tuple(self.questions))
        if not self.questions:
            raise ValueError("QuestionHuman.questions must be non-empty")


@dataclass(frozen=True)
class PerceptionRequest:
    reason: str


PlannerOutput = Union[Instructions, QuestionHuman, PerceptionRequest]


class FeedbackSource(Enum):
    NONE = "none"
    PERCEPTION = "perception"
    HUMAN = "human"
    ANALYZER = "analyzer"
    SIMULATOR = "simulator"


@dataclass(frozen=True)
class Feedback:
    source: FeedbackSource
    text: str = ""
    payload: Any = None

    def __post_init__(self):
        if self.source is not FeedbackSource.NONE and not self.text:
            raise ValueError("feedback text must be non-empty when a source is set")

    @classmethod
    def none(cls) -> "Feedback":
        return cls(source=FeedbackSource.NONE)


class SessionStatus(Enum):
    RUNNING = "running"
    AWAITING_HUMAN = "awaiting_human"
    CONVERGED = "converged"
    EXHAUSTED = "exhausted"
    AWAITING_HUMAN_TIMEOUT = "awaiting_human_timeout"
    AGENT_ERROR = "agent_error"


@dataclass(frozen=True)
class TranscriptEvent:
    seq: int
    timestamp: float
    kind: str  # planner_output | feedback | verdict | question | answer | status
    body: dict

    def to_dict(self) -> dict:
        return {"seq": self.seq, "timestamp": self.timestamp, "kind": self.kind, "body": self.body}


@dataclass
class SessionState:
    """Mutable per-session loop state, owned by a single orchestrator session."""

    instruction: str
    scene: Scene
    iteration: int = 0
    last_output: PlannerOutput | None = None
    last_feedback: Feedback = field(default_factory=Feedback.none)
    transcript: list[TranscriptEvent] = field(default_factory=list)
    status: SessionStatus = SessionStatus.RUNNING
