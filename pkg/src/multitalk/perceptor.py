"""Scene sources standing in for the camera pipeline: synthetic generation for
benchmarks, scene files for replay, and viewpoint re-scan semantics with
configurable detection-error injection.

Re-scanning is modeled as monotone error lifting: hidden objects appear and
mislabels are corrected once the viewpoint index reaches the error spec's
reveal threshold. Objects rest on the table (center height equals the z half
extent).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Protocol

import numpy as np

from .errors import ConfigError, PlacementInfeasible
from .geometry import WorkspaceRegion, DEFAULT_WORKSPACE
from .model import (
    Grasp,
    Home,
    Move,
    ObjectObservation,
    Plan,
    Scene,
    scene_from_dict,
    scene_to_dict,
)

# Keep generated objects clear of the near-base strip where a top-down tool
# forces the elbow against its limit; see the arm model notes.
INNER_X_MARGIN = 0.09
EDGE_MARGIN = 0.01
DEFAULT_CLEARANCE = 0.02
DEFAULT_MAX_ATTEMPTS = 10_000


def load_size_table(path: str | Path | None = None) -> dict[str, tuple[float, float, float]]:
    """Per-category nominal half extents, from the packaged table or a file."""
    if path is None:
        text = resources.files("multitalk.data").joinpath("sizes.json").read_text()
    else:
        text = Path(path).read_text()
    doc = json.loads(text)
    table = {}
    for label, hes in doc.items():
        hx, hy, hz = (float(v) for v in hes)
        if min(hx, hy, hz) <= 0:
            raise ConfigError(f"size table entry {label!r} must be positive")
        table[label] = (hx, hy, hz)
    return table


@dataclass(frozen=True)
class DetectionErrorSpec:
    """Detection faults visible below the reveal viewpoint."""

    hidden_ids: frozenset[str] = frozenset()
    mislabels: tuple[tuple[str, str], ...] = ()
    reveal_at_viewpoint: int = 1

    def __post_init__(self):
        object.__setattr__(self, "hidden_ids", frozenset(self.hidden_ids))
        mislabels = self.mislabels
        if isinstance(mislabels, dict):
            mislabels = tuple(sorted(mislabels.items()))
        object.__setattr__(self, "mislabels", tuple(mislabels))
        if self.reveal_at_viewpoint < 1:
            raise ConfigError("reveal_at_viewpoint must be >= 1")

    def mislabel_map(self) -> dict[str, str]:
        return dict(self.mislabels)

    @classmethod
    def from_dict(cls, doc: dict) -> "DetectionErrorSpec":
        return cls(
            hidden_ids=frozenset(doc.get("hidden_ids", [])),
            mislabels=tuple(sorted(doc.get("mislabels", {}).items())),
            reveal_at_viewpoint=int(doc.get("reveal_at_viewpoint", 1)),
        )

    def to_dict(self) -> dict:
        return {
            "hidden_ids": sorted(self.hidden_ids),
            "mislabels": dict(self.mislabels),
            "reveal_at_viewpoint": self.reveal_at_viewpoint,
        }


class SceneSource(Protocol):
    def snapshot(self) -> Scene: ...

    def rescan(self) -> Scene: ...


@dataclass
class SyntheticSource:
    """Scene source over an in-memory ground truth.

    snapshot() is repeatable until the world changes; rescan() increments the
    viewpoint and lifts detection errors once the reveal threshold is met.
    """

    ground_truth: Scene
    errors: DetectionErrorSpec | None = None
    viewpoint: int = 0

    def __post_init__(self):
        if self.errors is not None:
            known = self.ground_truth.ids()
            bad = (set(self.errors.hidden_ids) | set(self.errors.mislabel_map())) - known
            if bad:
                raise ConfigError(f"error spec names unknown object ids: {sorted(bad)}")

    def snapshot(self) -> Scene:
        objects = self.ground_truth.objects
        if self.errors is not None and self.viewpoint < self.errors.reveal_at_viewpoint:
            mislabels = self.errors.mislabel_map()
            visible = []
            for o in objects:
                if o.id in self.errors.hidden_ids:
                    continue
                if o.id in mislabels:
                    o = ObjectObservation(
                        id=o.id, label=mislabels[o.id],
                        center=o.center, half_extents=o.half_extents,
                    )
                visible.append(o)
            objects = tuple(visible)
        return Scene(objects=objects, viewpoint_id=self.viewpoint)

    def rescan(self) -> Scene:
        self.viewpoint += 1
        return self.snapshot()


def load_scene_file(path: str | Path) -> SyntheticSource:
    """Scene file: the canonical scene schema, optionally extended with an
    "errors" block."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"scene file not found: {path}")
    doc = json.loads(path.read_text())
    scene = scene_from_dict(doc)
    errors = DetectionErrorSpec.from_dict(doc["errors"]) if "errors" in doc else None
    return SyntheticSource(ground_truth=scene, errors=errors)


def save_scene_file(path: str | Path, scene: Scene,
                    errors: DetectionErrorSpec | None = None) -> None:
    doc = scene_to_dict(scene)
    if errors is not None:
        doc["errors"] = errors.to_dict()
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def generate_environment_config(
    task_id: str,
    object_catalog: list[str],
    n_objects: int,
    seed: int,
    workspace: WorkspaceRegion = DEFAULT_WORKSPACE,
    size_table: dict[str, tuple[float, float, float]] | None = None,
    min_clearance: float = DEFAULT_CLEARANCE,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    require_labels: tuple[str, ...] = (),
) -> Scene:
    """Seed-deterministic random scene: labels drawn with replacement from the
    catalog (required labels first), boxes rejection-sampled fully inside the
    workspace with at least min_clearance of face separation.

    The attempt budget covers the whole scene; exceeding it raises
    PlacementInfeasible.
    """
    if n_objects < 1:
        raise ValueError("n_objects must be >= 1")
    if not object_catalog:
        raise ValueError("object catalog must be non-empty")
    table = size_table if size_table is not None else load_size_table()
    for label in list(object_catalog) + list(require_labels):
        if label not in table:
            raise ConfigError(f"no size entry for label {label!r}")

    rng = np.random.default_rng(seed)
    labels = list(require_labels[:n_objects])
    while len(labels) < n_objects:
        labels.append(object_catalog[int(rng.integers(len(object_catalog)))])

    placed: list[ObjectObservation] = []
    counters: dict[str, int] = {}
    attempts = 0
    for label in labels:
        he = table[label]
        lo_x = max(workspace.min_corner[0] + INNER_X_MARGIN,
                   workspace.min_corner[0] + he[0] + EDGE_MARGIN)
        hi_x = workspace.max_corner[0] - he[0] - EDGE_MARGIN
        lo_y = workspace.min_corner[1] + he[1] + EDGE_MARGIN
        hi_y = workspace.max_corner[1] - he[1] - EDGE_MARGIN
        if lo_x >= hi_x or lo_y >= hi_y:
            raise PlacementInfeasible(f"object {label!r} cannot fit in the workspace")
        while True:
            attempts += 1
            if attempts > max_attempts:
                raise PlacementInfeasible(
                    f"gave up after {max_attempts} placement attempts with "
                    f"{len(placed)}/{n_objects} objects placed"
                )
            x = float(rng.uniform(lo_x, hi_x))
            y = float(rng.uniform(lo_y, hi_y))
            center = (x, y, he[2])
            ok = True
            for other in placed:
                gap = min_clearance / 2.0
                if all(
                    abs(center[i] - other.center[i])
                    <= he[i] + other.half_extents[i] + 2 * gap
                    for i in range(3)
                ):
                    ok = False
                    break
            if ok:
                break
        k = counters.get(label, 0)
        counters[label] = k + 1
        placed.append(
            ObjectObservation(id=f"{label}_{k}", label=label, center=center,
                              half_extents=he)
        )
    return Scene(objects=tuple(placed), viewpoint_id=0)


def final_move_targets(plan: Plan) -> dict[str, tuple[float, float, float]]:
    """Per-object final placement implied by a plan: each grasp binds the next
    move's target to that object; later grasps of the same object override."""
    targets: dict[str, tuple[float, float, float]] = {}
    held: str | None = None
    for step in plan.steps:
        if isinstance(step, Grasp):
            held = step.object_id
        elif isinstance(step, Move):
            if held is not None:
                targets[held] = step.target
                held = None
        elif isinstance(step, Home):
            held = None
    return targets


def apply_world_update(source: SyntheticSource, executed_plan: Plan) -> Scene:
    """Reflect a successfully simulated plan in the ground truth: grasped
    objects move to their final move targets and rest on the table."""
    targets = final_move_targets(executed_plan)
    if not targets:
        return source.snapshot()
    updated = []
    for o in source.ground_truth.objects:
        if o.id in targets:
            tx, ty, _ = targets[o.id]
            o = ObjectObservation(
                id=o.id, label=o.label,
                center=(tx, ty, o.half_extents[2]),
                half_extents=o.half_extents,
            )
        updated.append(o)
    source.ground_truth = Scene(
        objects=tuple(updated), viewpoint_id=source.ground_truth.viewpoint_id
    )
    return source.snapshot()
