"""Prompt templates for the two agent roles.

Both prompts are pure functions of their inputs (golden-test friendly) and the
user prompts carry machine-readable OBJECTS lines so deterministic backends
can reconstruct the scene without side channels.
"""

from __future__ import annotations

import json

from ..geometry import WorkspaceRegion
from ..model import Feedback, FeedbackSource, Plan, Scene, serialize_plan

PLANNER_SYSTEM_TEMPLATE = """\
You are the motion planner for a single-arm tabletop robot.

The robot supports exactly three action primitives:
- {{"action": "grasp", "object": "<object id>"}} picks up the named object. The \
gripper holds one object at a time; the next move sets it down.
- {{"action": "move", "target": [x, y, z]}} carries the held object to the target \
(meters, base frame) and releases it there; with an empty gripper it just moves the arm.
- {{"action": "home"}} returns the arm to its rest configuration.

The admissible workspace is x in [{x_lo:.3f}, {x_hi:.3f}], y in [{y_lo:.3f}, {y_hi:.3f}], \
z in [{z_lo:.3f}, {z_hi:.3f}] (meters). Move targets and grasped objects must lie inside it.

Respond with exactly one JSON object and no surrounding prose:
- {{"type": "instructions", "plan": [<steps>]}} when you can produce a plan.
- {{"type": "question human", "questions": ["..."]}} when the task is ambiguous. \
Ask as few questions as possible; never ask about things you can decide yourself.
- {{"type": "perception feedback", "reason": "..."}} when the object list looks wrong \
or incomplete and the scene should be re-scanned from a different viewpoint.
"""

ANALYZER_SYSTEM_TEMPLATE = """\
You review plans proposed for a single-arm tabletop robot before execution.

Check the plan against the task and the object list for logical errors, \
references to objects that are not present, placements onto occupied or \
out-of-reach locations, and grasp sequencing that violates the one-object \
gripper. Reason about what the table looks like after each step.

The admissible workspace is x in [{x_lo:.3f}, {x_hi:.3f}], y in [{y_lo:.3f}, {y_hi:.3f}], \
z in [{z_lo:.3f}, {z_hi:.3f}] (meters).

Respond with exactly one JSON object and no surrounding prose:
- {{"verdict": "feasible"}} when the plan should work as written.
- {{"verdict": "revise", "reasons": ["..."]}} when it must change; give concrete, \
specific reasons the planner can act on.
"""


def _workspace_fields(w: WorkspaceRegion) -> dict:
    return {
        "x_lo": w.min_corner[0], "x_hi": w.max_corner[0],
        "y_lo": w.min_corner[1], "y_hi": w.max_corner[1],
        "z_lo": w.min_corner[2], "z_hi": w.max_corner[2],
    }


def _object_lines(scene: Scene) -> str:
    lines = []
    for o in scene.objects:
        record = {
            "id": o.id,
            "label": o.label,
            "center": [round(c, 4) for c in o.center],
            "half_extents": [round(h, 4) for h in o.half_extents],
        }
        lines.append("- " + json.dumps(record, separators=(", ", ": ")))
    return "\n".join(lines) if lines else "(none detected)"


def build_planner_prompt(
    instruction: str,
    scene: Scene,
    feedback: Feedback,
    workspace: WorkspaceRegion,
) -> tuple[str, str]:
    """System and user prompts for a planner call.

    The user prompt carries the task, the detected objects, and the latest
    feedback labeled with its source; no FEEDBACK section on the first call.
    """
    system = PLANNER_SYSTEM_TEMPLATE.format(**_workspace_fields(workspace))
    parts = [
        f"TASK: {instruction}",
        "",
        "OBJECTS (one JSON record per line):",
        _object_lines(scene),
    ]
    if feedback.source is not FeedbackSource.NONE:
        parts += ["", f"FEEDBACK ({feedback.source.value}): {feedback.text}"]
    return system, "\n".join(parts)


def build_analyzer_prompt(
    instruction: str,
    plan: Plan,
    scene: Scene,
    workspace: WorkspaceRegion,
) -> tuple[str, str]:
    """System and user prompts for an analyzer call; the analyzer sees the
    same scene description the planner saw."""
    system = ANALYZER_SYSTEM_TEMPLATE.format(**_workspace_fields(workspace))
    user = "\n".join(
        [
            f"TASK: {instruction}",
            "",
            "OBJECTS (one JSON record per line):",
            _object_lines(scene),
            "",
            f"PROPOSED PLAN: {serialize_plan(plan)}",
        ]
    )
    return system, user
