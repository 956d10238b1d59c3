"""The eight benchmark tasks: instruction construction and per-task scene
composition rules.

Scenes come from the seeded generator; tasks that need structural guarantees
(an edible object for T2, bounded category multiplicity for the quadrant task,
exactly four objects for the square) encode them as composition constraints
applied before placement sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UnknownTask
from ..geometry import WorkspaceRegion
from ..model import Scene
from ..perceptor import generate_environment_config

OBJECT_CATALOG = ["sugar_box", "soup_can", "wooden_cube", "mustard_bottle", "apple"]
EDIBLE_LABELS = frozenset({"apple"})

# Oracle placements and temporary spots stay inside this sub-region, which the
# arm covers with wide joint margins (see the arm model notes).
PLACEMENT_ZONE = {"x": (0.35, 0.65), "y": (-0.30, 0.30)}


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    description: str
    n_objects_range: tuple[int, int]
    predicate_id: str
    expects_question: bool = False
    max_label_multiplicity: int | None = None

    def pick_n(self, rng: np.random.Generator) -> int:
        lo, hi = self.n_objects_range
        return int(rng.integers(lo, hi + 1))


TASKS: dict[str, TaskSpec] = {
    "T1": TaskSpec("T1", "Give me the <object>", (2, 4), "deliver_requested",
                   expects_question=True),
    "T2": TaskSpec("T2", "Give me something to eat", (2, 4), "deliver_edible",
                   expects_question=True),
    "T3": TaskSpec("T3", "Move the objects to the other side of the table",
                   (2, 4), "mirrored"),
    "T4": TaskSpec("T4", "Same-category objects per quadrant", (4, 5),
                   "quadrants", max_label_multiplicity=3),
    "T5": TaskSpec("T5", "Arrange the objects to form a square", (4, 4), "square"),
    "T6": TaskSpec("T6", "Interchange the locations of two objects", (2, 3),
                   "interchanged"),
    "T7": TaskSpec("T7", "Interchange the locations of two object pairs", (4, 4),
                   "pairs_interchanged"),
    "T8": TaskSpec("T8", "Arrange the objects in a straight line", (3, 5), "line"),
}

TASK_ORDER = ["T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8"]


def get_task(task_id: str) -> TaskSpec:
    try:
        return TASKS[task_id]
    except KeyError:
        raise UnknownTask(f"unknown task id {task_id!r}") from None


def _compose_labels(task: TaskSpec, n: int, rng: np.random.Generator) -> tuple[str, ...]:
    """Deterministic label multiset honoring the task's composition rules."""
    if task.task_id == "T2":
        labels = ["apple"]
        while len(labels) < n:
            labels.append(OBJECT_CATALOG[int(rng.integers(len(OBJECT_CATALOG)))])
        return tuple(labels)
    if task.max_label_multiplicity is not None:
        counts: dict[str, int] = {}
        labels = []
        while len(labels) < n:
            label = OBJECT_CATALOG[int(rng.integers(len(OBJECT_CATALOG)))]
            if counts.get(label, 0) >= task.max_label_multiplicity:
                continue
            counts[label] = counts.get(label, 0) + 1
            labels.append(label)
        # the quadrant task needs at least two categories
        if len(counts) < 2:
            labels[-1] = next(l for l in OBJECT_CATALOG if l != labels[0])
        return tuple(labels)
    return ()


def build_task_scene(
    task: TaskSpec,
    seed: int,
    workspace: WorkspaceRegion,
    min_clearance: float = 0.03,
) -> Scene:
    """Seeded scene for one benchmark cell; same seed, same scene."""
    rng = np.random.default_rng(seed)
    n = task.pick_n(rng)
    require = _compose_labels(task, n, rng)
    return generate_environment_config(
        task.task_id,
        OBJECT_CATALOG,
        n,
        seed=int(rng.integers(2**31)),
        workspace=workspace,
        min_clearance=min_clearance,
        require_labels=require,
    )


def build_instruction(task: TaskSpec, scene: Scene, seed: int) -> str:
    """Concrete instruction text for a scene; object-directed tasks name ids
    deterministically so scripted planners and predicates agree."""
    rng = np.random.default_rng(seed + 0x5EED)
    ids = [o.id for o in scene.objects]
    if task.task_id == "T1":
        target = scene.objects[int(rng.integers(len(ids)))]
        return f"Give me the {target.label}."
    if task.task_id == "T2":
        return "Give me something to eat."
    if task.task_id == "T3":
        return "Move the objects to the other side of the table."
    if task.task_id == "T4":
        return (
            "The objects of the same category must be in the same quadrant "
            "and the objects of different categories in different quadrants."
        )
    if task.task_id == "T5":
        return "Arrange the objects to form a square."
    if task.task_id == "T6":
        a, b = rng.choice(len(ids), size=2, replace=False)
        return f"Interchange the locations of two objects: {ids[a]} and {ids[b]}."
    if task.task_id == "T7":
        order = list(rng.permutation(len(ids)))
        a1, b1, a2, b2 = (ids[i] for i in order[:4])
        return (
            f"Interchange the locations of two object pairs: {a1} and {b1}; "
            f"{a2} and {b2}."
        )
    if task.task_id == "T8":
        return "Arrange the objects on the table such that they form a straight line."
    raise UnknownTask(task.task_id)
