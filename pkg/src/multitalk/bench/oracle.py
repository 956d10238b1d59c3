"""Deterministic planner stand-ins for the benchmark grid.

The oracle planner reads the same prompts a live model would, reconstructs the
scene from the OBJECTS lines, and emits a correct, conflict-aware plan: it
orders placements greedily and breaks occupancy cycles through temporary
locations, asking the user for a destination only on the delivery tasks. The
direct-swap planner is the pathological probe: on interchange tasks it always
proposes moving objects straight onto each other's locations and never learns
from feedback.
"""

from __future__ import annotations

import json
import re

from ..geometry import Aabb, aabb_overlap
from ..model import Scene, ObjectObservation
from .tasks import EDIBLE_LABELS, PLACEMENT_ZONE

_ANSWER_RE = re.compile(r"\[(-?\d+\.?\d*),\s*(-?\d+\.?\d*)\]")
_T1_RE = re.compile(r"^Give me the (\w+)\.$")
_T6_RE = re.compile(r"^Interchange the locations of two objects: (\S+) and (\S+)\.$")
_T7_RE = re.compile(
    r"^Interchange the locations of two object pairs: (\S+) and (\S+); "
    r"(\S+) and (\S+)\.$"
)
_TASK_RE = re.compile(r"^TASK: (.+)$", re.MULTILINE)
_FEEDBACK_RE = re.compile(r"^FEEDBACK \((\w+)\): (.*)$", re.MULTILINE | re.DOTALL)

_TARGET_EPS = 0.01  # objects this close to their target stay put
_TEMP_INFLATE = 0.06
_TARGET_INFLATE = 0.002
_GRID_STEP = 0.05
_GRIPPER_XY = 0.04  # matches the simulator's default gripper footprint
_GRASP_MARGIN = 0.004

_MIDLINES = (0.475, 0.0)  # workspace midlines of the default region


def parse_prompt(user_prompt: str) -> tuple[str, list[dict], str | None, str]:
    """(instruction, object records, feedback source, feedback text)."""
    m = _TASK_RE.search(user_prompt)
    instruction = m.group(1).strip() if m else ""
    objects = [
        json.loads(line[2:])
        for line in user_prompt.splitlines()
        if line.startswith("- ")
    ]
    fm = _FEEDBACK_RE.search(user_prompt)
    if fm:
        return instruction, objects, fm.group(1), fm.group(2)
    return instruction, objects, None, ""


def scene_from_records(records: list[dict]) -> Scene:
    return Scene(objects=tuple(
        ObjectObservation(
            id=r["id"], label=r["label"],
            center=tuple(r["center"]), half_extents=tuple(r["half_extents"]),
        )
        for r in records
    ))


def _grasp(oid: str) -> dict:
    return {"action": "grasp", "object": oid}


def _move(x: float, y: float, z: float) -> dict:
    return {"action": "move", "target": [round(x, 3), round(y, 3), round(z, 3)]}


def _instructions(steps: list[dict]) -> str:
    return json.dumps({"type": "instructions", "plan": steps})


def _question(text: str) -> str:
    return json.dumps({"type": "question human", "questions": [text]})


def _clear_at(center_xy, he, world: dict[str, Aabb], exclude: set[str],
              inflate: float) -> bool:
    box = Aabb(
        center=(center_xy[0], center_xy[1], he[2]),
        half_extents=(he[0] + inflate, he[1] + inflate, he[2]),
    )
    return not any(
        aabb_overlap(box, other)
        for oid, other in world.items()
        if oid not in exclude
    )


def _grasp_safe(n_center, n_he, o_center, o_he) -> bool:
    """Can the gripper descend onto an object at n without touching a box at o?

    The gripper body starts at the grasped object's top, so anything shorter
    never interferes; otherwise some horizontal axis must separate the gripper
    footprint from the neighbor."""
    if o_center[2] + o_he[2] < 2 * n_he[2] - 1e-9:
        return True
    for axis in range(2):
        reach = max(n_he[axis], _GRIPPER_XY) + o_he[axis] + _GRASP_MARGIN
        if abs(n_center[axis] - o_center[axis]) > reach:
            return True
    return False


def _placement_ok(oid: str, center_xy, he, world: dict[str, Aabb],
                  will_grasp_later: set[str]) -> bool:
    """Placing oid here must clear every other box, keep the gripper descent
    above it collision-free, and not wall in any object still to be grasped."""
    center = (center_xy[0], center_xy[1], he[2])
    if not _clear_at(center_xy, he, world, {oid}, _TARGET_INFLATE):
        return False
    for other_id, other in world.items():
        if other_id == oid:
            continue
        if not _grasp_safe(center, he, other.center, other.half_extents):
            return False
        if other_id in will_grasp_later and not _grasp_safe(
            other.center, other.half_extents, center, he
        ):
            return False
    return True


def _temp_spot(he, world: dict[str, Aabb], pending_targets: dict[str, tuple],
               pending_he: dict[str, tuple]) -> tuple[float, float] | None:
    """First grid spot clear of the current world and of every pending target."""
    phantoms = dict(world)
    for oid, t in pending_targets.items():
        phe = pending_he[oid]
        phantoms[f"__target_{oid}"] = Aabb(
            center=(t[0], t[1], phe[2]), half_extents=phe
        )
    (x_lo, x_hi), (y_lo, y_hi) = PLACEMENT_ZONE["x"], PLACEMENT_ZONE["y"]
    steps_x = int(round((x_hi - x_lo) / _GRID_STEP)) + 1
    steps_y = int(round((y_hi - y_lo) / _GRID_STEP)) + 1
    for i in range(steps_x):
        for j in range(steps_y):
            x = x_lo + i * _GRID_STEP
            y = y_lo + j * _GRID_STEP
            if _clear_at((x, y), he, phantoms, set(), _TEMP_INFLATE):
                return (x, y)
    return None


def plan_rearrangement(scene: Scene, targets: dict[str, tuple[float, float]]) -> list[dict]:
    """Grasp/move sequence realizing the target map without placement
    conflicts: place whatever is currently free, park one blocker at a
    temporary spot when nothing is."""
    world = {
        o.id: Aabb(center=o.center, half_extents=o.half_extents)
        for o in scene.objects
    }
    he = {o.id: o.half_extents for o in scene.objects}
    remaining = {
        oid: t
        for oid, t in targets.items()
        if abs(world[oid].center[0] - t[0]) > _TARGET_EPS
        or abs(world[oid].center[1] - t[1]) > _TARGET_EPS
    }
    steps: list[dict] = []
    while remaining:
        progressed = False
        for oid in sorted(remaining):
            t = remaining[oid]
            later = set(remaining) - {oid}
            if _placement_ok(oid, t, he[oid], world, later):
                steps += [_grasp(oid), _move(t[0], t[1], he[oid][2])]
                world[oid] = Aabb(
                    center=(t[0], t[1], he[oid][2]), half_extents=he[oid]
                )
                del remaining[oid]
                progressed = True
        if not progressed:
            oid = sorted(remaining)[0]
            pending = {k: v for k, v in remaining.items() if k != oid}
            spot = _temp_spot(he[oid], world, pending, he)
            if spot is None:
                break  # emit what we have; the loop's gates will coach us
            steps += [_grasp(oid), _move(spot[0], spot[1], he[oid][2])]
            world[oid] = Aabb(
                center=(spot[0], spot[1], he[oid][2]), half_extents=he[oid]
            )
    steps.append({"action": "home"})
    return steps


def _quadrant_slots(sx: int, sy: int) -> list[tuple[float, float]]:
    """Three placement slots per quadrant, clear of the midlines."""
    mid_x, mid_y = _MIDLINES
    x = mid_x + sx * 0.08
    return [(x, mid_y + sy * off) for off in (0.06, 0.18, 0.30)]


def compute_targets(instruction: str, scene: Scene) -> dict[str, tuple[float, float]]:
    """Per-object destinations for the non-interactive tasks."""
    mid_x, mid_y = _MIDLINES

    if instruction.startswith("Move the objects to the other side"):
        return {o.id: (o.center[0], 2 * mid_y - o.center[1]) for o in scene.objects}

    if instruction.startswith("The objects of the same category"):
        categories = sorted({o.label for o in scene.objects})
        corners = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
        targets = {}
        for ci, label in enumerate(categories):
            slots = _quadrant_slots(*corners[ci])
            members = sorted(o.id for o in scene.objects if o.label == label)
            for k, oid in enumerate(members):
                targets[oid] = slots[k]
        return targets

    if instruction.startswith("Arrange the objects to form a square"):
        half = 0.10
        corners = [
            (mid_x - half, mid_y - half), (mid_x - half, mid_y + half),
            (mid_x + half, mid_y + half), (mid_x + half, mid_y - half),
        ]
        ids = sorted(o.id for o in scene.objects)[:4]
        return dict(zip(ids, corners))

    m = _T6_RE.match(instruction)
    if m:
        a, b = m.group(1), m.group(2)
        pa, pb = scene.get(a), scene.get(b)
        return {a: (pb.center[0], pb.center[1]), b: (pa.center[0], pa.center[1])}

    m = _T7_RE.match(instruction)
    if m:
        targets = {}
        for a, b in ((m.group(1), m.group(2)), (m.group(3), m.group(4))):
            pa, pb = scene.get(a), scene.get(b)
            targets[a] = (pb.center[0], pb.center[1])
            targets[b] = (pa.center[0], pa.center[1])
        return targets

    if instruction.startswith("Arrange the objects on the table such that"):
        ids = sorted(o.id for o in scene.objects)
        n = len(ids)
        start, end = (0.36, -0.28), (0.64, 0.28)
        targets = {}
        for k, oid in enumerate(ids):
            f = k / (n - 1) if n > 1 else 0.5
            targets[oid] = (
                start[0] + f * (end[0] - start[0]),
                start[1] + f * (end[1] - start[1]),
            )
        return targets

    return {}


def requested_label(instruction: str, scene: Scene) -> str | None:
    """The object label a delivery task refers to, if this is one."""
    m = _T1_RE.match(instruction)
    if m:
        return m.group(1)
    if instruction.startswith("Give me something to eat"):
        for o in scene.objects:
            if o.label in EDIBLE_LABELS:
                return o.label
        return None
    return None


def find_answer_location(texts: list[str]) -> tuple[float, float] | None:
    """Last coordinate pair mentioned in any human answer text."""
    for text in reversed(texts):
        matches = _ANSWER_RE.findall(text)
        if matches:
            x, y = matches[-1]
            return float(x), float(y)
    return None


class OraclePlanner:
    """Prompt-driven planner that always produces a correct feasible plan."""

    def complete(self, system_prompt: str, user_prompt: str, history) -> str:
        instruction, records, fb_source, fb_text = parse_prompt(user_prompt)
        scene = scene_from_records(records)

        label = requested_label(instruction, scene)
        if label is not None:
            texts = [fb_text] if fb_source == "human" else []
            texts += [
                m["content"] for m in history
                if m["role"] == "user" and "FEEDBACK (human)" in m["content"]
            ]
            answer = find_answer_location(texts)
            if answer is None:
                return _question(f"Where should I place the {label}?")
            obj = next(o for o in scene.objects if o.label == label)
            steps = plan_rearrangement(scene, {obj.id: answer})
            return _instructions(steps)

        targets = compute_targets(instruction, scene)
        return _instructions(plan_rearrangement(scene, targets))


class DirectSwapPlanner:
    """Like the oracle, except interchange tasks get the naive direct swap:
    objects move straight onto each other's occupied locations, regardless of
    feedback."""

    def __init__(self):
        self._oracle = OraclePlanner()

    def complete(self, system_prompt: str, user_prompt: str, history) -> str:
        instruction, records, _, _ = parse_prompt(user_prompt)
        scene = scene_from_records(records)
        pairs = []
        m6 = _T6_RE.match(instruction)
        if m6:
            pairs = [(m6.group(1), m6.group(2))]
        else:
            m7 = _T7_RE.match(instruction)
            if m7:
                pairs = [(m7.group(1), m7.group(2)), (m7.group(3), m7.group(4))]
        if not pairs:
            return self._oracle.complete(system_prompt, user_prompt, history)
        steps: list[dict] = []
        for a, b in pairs:
            pa, pb = scene.get(a), scene.get(b)
            steps += [
                _grasp(a), _move(pb.center[0], pb.center[1], pa.half_extents[2]),
                _grasp(b), _move(pa.center[0], pa.center[1], pb.half_extents[2]),
            ]
        steps.append({"action": "home"})
        return _instructions(steps)


class ApproveAllAnalyzer:
    def complete(self, system_prompt: str, user_prompt: str, history) -> str:
        return json.dumps({"verdict": "feasible"})


class BenchHuman:
    """Deterministic answering machine for the delivery tasks: picks a free
    spot for the requested object and answers with its coordinates."""

    def __init__(self, instruction: str, scene: Scene):
        self.instruction = instruction
        self.scene = scene

    def ask(self, questions: list[str], timeout: float | None) -> list[str]:
        label = requested_label(self.instruction, self.scene)
        answers = []
        for q in questions:
            if label is not None and "place" in q.lower():
                spot = self._delivery_spot(label)
                answers.append(f"Place it at [{spot[0]:.3f}, {spot[1]:.3f}].")
            else:
                answers.append("No preference.")
        return answers

    def _delivery_spot(self, label: str) -> tuple[float, float]:
        obj = next(o for o in self.scene.objects if o.label == label)
        world = {
            o.id: Aabb(center=o.center, half_extents=o.half_extents)
            for o in self.scene.objects
        }
        spot = _temp_spot(obj.half_extents, world, {}, {})
        return spot if spot is not None else (0.60, -0.25)
