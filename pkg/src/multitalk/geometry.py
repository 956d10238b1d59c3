"""Axis-aligned box algebra, workspace membership, and the plan bounds gate.

Touching faces count as overlap (closed intervals): the conservative choice
for a collision predicate guarding a real arm.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Plan, Grasp, Move, Scene, Vec3, fmt_vec3

_AXES = "xyz"


@dataclass(frozen=True)
class Aabb:
    center: Vec3
    half_extents: Vec3

    def __post_init__(self):
        if any(h <= 0 for h in self.half_extents):
            raise ValueError("half_extents must be positive")

    def translated(self, to: Vec3) -> "Aabb":
        return Aabb(center=tuple(to), half_extents=self.half_extents)


@dataclass(frozen=True)
class WorkspaceRegion:
    min_corner: Vec3
    max_corner: Vec3

    def __post_init__(self):
        if not all(lo < hi for lo, hi in zip(self.min_corner, self.max_corner)):
            raise ValueError("min_corner must be componentwise below max_corner")

    def to_dict(self) -> dict:
        return {"min": list(self.min_corner), "max": list(self.max_corner)}

    @classmethod
    def from_dict(cls, doc: dict) -> "WorkspaceRegion":
        return cls(tuple(float(v) for v in doc["min"]), tuple(float(v) for v in doc["max"]))


# Tabletop reachable by a 7-DoF arm mounted at the origin; overridable in config.
DEFAULT_WORKSPACE = WorkspaceRegion((0.25, -0.35, 0.0), (0.70, 0.35, 0.50))


def object_box(obj) -> Aabb:
    return Aabb(center=obj.center, half_extents=obj.half_extents)


def aabb_overlap(a: Aabb, b: Aabb) -> bool:
    """True iff the boxes intersect on all three axes; touching faces count."""
    return all(
        abs(a.center[i] - b.center[i]) <= a.half_extents[i] + b.half_extents[i]
        for i in range(3)
    )


def point_in_workspace(p: Vec3, w: WorkspaceRegion) -> bool:
    return all(w.min_corner[i] <= p[i] <= w.max_corner[i] for i in range(3))


def _bounds_violation(p: Vec3, w: WorkspaceRegion) -> str:
    """Name the first axis on which p leaves the region, e.g. 'x exceeds 0.70'."""
    for i in range(3):
        if p[i] < w.min_corner[i]:
            return f"{_AXES[i]} is below {w.min_corner[i]:.2f}"
        if p[i] > w.max_corner[i]:
            return f"{_AXES[i]} exceeds {w.max_corner[i]:.2f}"
    return ""


def check_workspace_bounds(plan: Plan, scene: Scene, w: WorkspaceRegion) -> str:
    """Bounds gate over Move targets and grasp pickup points.

    Returns "" when everything lies inside the region; otherwise a message
    containing the literal substring "out of bounds" plus the offending step
    (1-based) and point, so the loop's substring test fires.
    """
    problems = []
    for i, step in enumerate(plan.steps, start=1):
        if isinstance(step, Move):
            if not point_in_workspace(step.target, w):
                why = _bounds_violation(step.target, w)
                problems.append(
                    f"step {i}: target {fmt_vec3(step.target, 2)} is out of bounds ({why})"
                )
        elif isinstance(step, Grasp):
            obj = scene.get(step.object_id)
            if obj is not None and not point_in_workspace(obj.center, w):
                why = _bounds_violation(obj.center, w)
                problems.append(
                    f"step {i}: object '{obj.id}' at {fmt_vec3(obj.center, 2)} "
                    f"is out of bounds ({why})"
                )
    return "; ".join(problems)


def placement_conflicts(
    target: Vec3, held: Aabb, scene: Scene, ignore_id: str = ""
) -> list[str]:
    """Ids of scene objects (in scene order) whose box overlaps the held box
    re-centered at `target`. `ignore_id` excludes the held object itself."""
    moved = held.translated(target)
    return [
        obj.id
        for obj in scene.objects
        if obj.id != ignore_id and aabb_overlap(moved, object_box(obj))
    ]
