"""Quasi-static plan feasibility checking.

Plans run against an axis-aligned-box world with the gripper and any held
object swept along resolved-rate trajectories. Every waypoint is checked in a
fixed priority order (joint limits, then Jacobian conditioning, then box
collision); move completions additionally check placement occupancy and
controller accuracy. The first failure wins and is verbalized as directed
feedback, including a conflict-free placement suggestion found by spiral
search when one exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

from ..geometry import Aabb, WorkspaceRegion, aabb_overlap, object_box
from ..model import Grasp, Home, Move, Plan, Scene, Vec3, fmt_vec3
from .arm import ArmModel, SimConfig
from .kinematics import forward_kinematics
from .trajectory import Trajectory, plan_trajectory

# IK misses beyond this multiple of placement_tolerance count as unreachable
# targets rather than controller precision faults.
UNREACHABLE_FACTOR = 10.0

SUGGESTION_GRID_STEP = 0.05
SUGGESTION_MARGIN = 0.01


class FailureKind(Enum):
    COLLISION = "collision"
    SINGULARITY = "singularity"
    JOINT_LIMIT = "joint_limit"
    CONTROLLER_ERROR = "controller_error"
    UNREACHABLE = "unreachable"


@dataclass(frozen=True)
class SimSuccess:
    pass


@dataclass(frozen=True)
class SimFailure:
    kind: FailureKind
    step_index: int  # 0-based plan step
    detail: str
    suggestion: str


SimVerdict = Union[SimSuccess, SimFailure]


@dataclass(frozen=True, eq=False)
class SegmentTrace:
    """One tracked trajectory segment plus everything needed to re-check it
    independently: the world boxes at segment time, the held attachment, and
    the ids excluded from gripper contact (the object being grasped)."""

    step_index: int
    purpose: str  # transit | approach | grasp | lift | carry | place | retreat | home
    target: Vec3
    trajectory: Trajectory
    world: dict[str, Aabb]
    held_id: str | None
    held_half_extents: Vec3 | None
    excluded: frozenset[str]


@dataclass(frozen=True, eq=False)
class SimResult:
    verdict: SimVerdict
    feedback: str
    segments: list[SegmentTrace] = field(default_factory=list)


@dataclass(frozen=True)
class GraspPose:
    pre_grasp: Vec3
    grasp: Vec3


def grasp_resolution(scene: Scene, object_id: str, model: ArmModel, config: SimConfig) -> GraspPose:
    """Top-down grasp poses for an object: hover above its top by the grasp
    clearance, then descend so the tool point meets the top face center."""
    obj = scene.get(object_id)
    if obj is None:
        raise KeyError(f"no object '{object_id}' in scene")
    x, y, _ = obj.center
    top = obj.top
    return GraspPose(
        pre_grasp=(x, y, top + config.grasp_clearance),
        grasp=(x, y, top),
    )


def gripper_box(tcp: Vec3, config: SimConfig) -> Aabb:
    """The gripper body occupies a box sitting on top of the tool point."""
    ghe = config.gripper_box_half_extents
    return Aabb(center=(tcp[0], tcp[1], tcp[2] + ghe[2]), half_extents=ghe)


def held_box(tcp: Vec3, half_extents: Vec3) -> Aabb:
    """A held object hangs below the tool point by its own half height."""
    return Aabb(
        center=(tcp[0], tcp[1], tcp[2] - half_extents[2]), half_extents=half_extents
    )


def resting_center(target: Vec3, half_extents: Vec3) -> Vec3:
    """Where a released object ends up: target x/y at table-resting height."""
    return (target[0], target[1], half_extents[2])


def suggest_free_placement(
    world: dict[str, Aabb],
    footprint: Vec3,
    around: Vec3,
    workspace: WorkspaceRegion,
    ignore: frozenset[str] = frozenset(),
) -> Vec3 | None:
    """Spiral search over the table grid for the nearest spot where a box with
    the given half extents rests conflict-free, fully inside the workspace."""
    step = SUGGESTION_GRID_STEP
    rest_z = footprint[2]
    lo_x = workspace.min_corner[0] + footprint[0] + SUGGESTION_MARGIN
    hi_x = workspace.max_corner[0] - footprint[0] - SUGGESTION_MARGIN
    lo_y = workspace.min_corner[1] + footprint[1] + SUGGESTION_MARGIN
    hi_y = workspace.max_corner[1] - footprint[1] - SUGGESTION_MARGIN
    inflated = tuple(h + SUGGESTION_MARGIN for h in footprint)
    max_rings = int(
        max(
            workspace.max_corner[0] - workspace.min_corner[0],
            workspace.max_corner[1] - workspace.min_corner[1],
        )
        / step
    ) + 1

    def clear_at(x: float, y: float) -> bool:
        if not (lo_x <= x <= hi_x and lo_y <= y <= hi_y):
            return False
        candidate = Aabb(center=(x, y, rest_z), half_extents=inflated)
        return not any(
            aabb_overlap(candidate, box) for oid, box in world.items() if oid not in ignore
        )

    cx, cy = around[0], around[1]
    if clear_at(cx, cy):
        return (cx, cy, rest_z)
    for ring in range(1, max_rings + 1):
        r = ring * step
        # walk the square ring clockwise from the +x edge, deterministic order
        edge = [(-r + i * step) for i in range(2 * ring + 1)]
        candidates = (
            [(cx + r, cy + off) for off in edge]
            + [(cx + off, cy + r) for off in edge]
            + [(cx - r, cy + off) for off in edge]
            + [(cx + off, cy - r) for off in edge]
        )
        for x, y in candidates:
            if clear_at(x, y):
                return (round(x, 3), round(y, 3), rest_z)
    return None


def _suggestion_text(spot: Vec3 | None) -> str:
    if spot is None:
        return "no conflict-free spot found nearby; clear space on the table first"
    return f"a temporary location near {fmt_vec3(spot)} is free and inside the workspace"


def _describe_action(action) -> str:
    if isinstance(action, Grasp):
        return f"grasp '{action.object_id}'"
    if isinstance(action, Move):
        return f"move to {fmt_vec3(action.target)}"
    return "home"


class _SimState:
    """Mutable execution bookkeeping shared by the per-action handlers."""

    def __init__(self, plan: Plan, scene: Scene, model: ArmModel, config: SimConfig,
                 workspace: WorkspaceRegion):
        self.plan = plan
        self.scene = scene
        self.model = model
        self.config = config
        self.workspace = workspace
        self.q = np.asarray(model.home_config, dtype=float).copy()
        self.tcp, _ = forward_kinematics(model, self.q)
        self.world: dict[str, Aabb] = {o.id: object_box(o) for o in scene.objects}
        self.held_id: str | None = None
        self.held_he: Vec3 | None = None
        self.segments: list[SegmentTrace] = []

    def world_snapshot(self) -> dict[str, Aabb]:
        return dict(self.world)


def _check_waypoints(state: _SimState, trace: SegmentTrace, step_index: int,
                     action) -> SimFailure | None:
    """Waypoint checks in priority order: joint limits, conditioning, collision."""
    model, config = state.model, state.config
    traj = trace.trajectory
    qs, ps, conds = traj.waypoints, traj.positions, traj.condition_numbers
    lo, hi = model.joint_limits[:, 0], model.joint_limits[:, 1]

    below = qs < lo
    above = qs > hi
    limit_bad = below.any(axis=1) | above.any(axis=1)
    cond_bad = conds > config.condition_number_threshold

    collision_with: list[str | None] = []
    for w in range(len(qs)):
        tcp = tuple(ps[w])
        boxes = [gripper_box(tcp, config)]
        if trace.held_id is not None and trace.held_half_extents is not None:
            boxes.append(held_box(tcp, trace.held_half_extents))
        hit = None
        for oid, box in trace.world.items():
            if oid in trace.excluded:
                continue
            if any(aabb_overlap(b, box) for b in boxes):
                hit = oid
                break
        collision_with.append(hit)

    for w in range(len(qs)):
        if limit_bad[w]:
            joint = int(np.argmax(below[w] | above[w]))
            side = lo[joint] if below[w, joint] else hi[joint]
            detail = (
                f"joint {joint + 1} reaches {qs[w, joint]:.3f} rad, beyond its limit "
                f"{side:.4f} rad, while executing {_describe_action(action)}"
            )
            spot = suggest_free_placement(
                trace.world, _footprint(state, trace), tuple(ps[w]), state.workspace,
                ignore=_ignore_ids(trace),
            )
            return SimFailure(
                kind=FailureKind.JOINT_LIMIT,
                step_index=step_index,
                detail=detail,
                suggestion="keep targets away from the workspace edges; "
                + _suggestion_text(spot),
            )
        if cond_bad[w]:
            qtext = "[" + ", ".join(f"{v:.3f}" for v in qs[w]) + "]"
            detail = (
                f"condition number {conds[w]:.1f} exceeds the threshold "
                f"{config.condition_number_threshold:.1f} at joint configuration {qtext}, "
                f"near a kinematic singularity, while executing {_describe_action(action)}"
            )
            spot = suggest_free_placement(
                trace.world, _footprint(state, trace), tuple(ps[w]), state.workspace,
                ignore=_ignore_ids(trace),
            )
            return SimFailure(
                kind=FailureKind.SINGULARITY,
                step_index=step_index,
                detail=detail,
                suggestion="choose a target closer to the middle of the workspace; "
                + _suggestion_text(spot),
            )
        if collision_with[w] is not None:
            other = collision_with[w]
            mover = (
                f"held object '{trace.held_id}'" if trace.held_id is not None else "the gripper"
            )
            detail = (
                f"{mover} would collide with '{other}' while executing "
                f"{_describe_action(action)}"
            )
            spot = suggest_free_placement(
                trace.world, _footprint(state, trace), tuple(ps[-1]), state.workspace,
                ignore=_ignore_ids(trace) | {other},
            )
            return SimFailure(
                kind=FailureKind.COLLISION,
                step_index=step_index,
                detail=detail,
                suggestion=_suggestion_text(spot),
            )
    return None


def _footprint(state: _SimState, trace: SegmentTrace) -> Vec3:
    if trace.held_half_extents is not None:
        return trace.held_half_extents
    return state.config.gripper_box_half_extents


def _ignore_ids(trace: SegmentTrace) -> frozenset[str]:
    ignore = set(trace.excluded)
    if trace.held_id is not None:
        ignore.add(trace.held_id)
    return frozenset(ignore)


def _run_segment(state: _SimState, step_index: int, action, purpose: str,
                 target: Vec3,
                 extra_excluded: frozenset[str] = frozenset()) -> tuple[SegmentTrace, SimFailure | None]:
    """Track one straight segment, record its trace, and run all checks."""
    config = state.config
    traj = plan_trajectory(state.model, config, state.q, np.asarray(target, dtype=float))
    excluded: set[str] = set(extra_excluded)
    if state.held_id is not None:
        excluded.add(state.held_id)
    if isinstance(action, Grasp) and purpose in ("approach", "grasp"):
        excluded.add(action.object_id)
    trace = SegmentTrace(
        step_index=step_index,
        purpose=purpose,
        target=tuple(target),
        trajectory=traj,
        world=state.world_snapshot(),
        held_id=state.held_id,
        held_half_extents=state.held_he,
        excluded=frozenset(excluded),
    )
    state.segments.append(trace)

    failure = _check_waypoints(state, trace, step_index, action)
    if failure is not None:
        return trace, failure

    if not traj.reached:
        miss = traj.closest_approach
        spot = suggest_free_placement(
            trace.world, _footprint(state, trace), target, state.workspace,
            ignore=_ignore_ids(trace),
        )
        if miss > UNREACHABLE_FACTOR * config.placement_tolerance:
            detail = (
                f"target {fmt_vec3(target)} is unreachable while executing "
                f"{_describe_action(action)}; closest approach {miss:.3f} m"
            )
            return trace, SimFailure(
                kind=FailureKind.UNREACHABLE,
                step_index=step_index,
                detail=detail,
                suggestion=_suggestion_text(spot),
            )
        detail = (
            f"the controller stopped {miss * 1000:.1f} mm short of {fmt_vec3(target)} "
            f"(tolerance {config.placement_tolerance * 1000:.1f} mm) while executing "
            f"{_describe_action(action)}"
        )
        return trace, SimFailure(
            kind=FailureKind.CONTROLLER_ERROR,
            step_index=step_index,
            detail=detail,
            suggestion="pick a target farther from the edge of the reachable area; "
            + _suggestion_text(spot),
        )

    state.q = traj.waypoints[-1].copy()
    state.tcp = traj.positions[-1].copy()
    return trace, None


def _simulate(plan: Plan, scene: Scene, model: ArmModel, config: SimConfig,
              workspace: WorkspaceRegion) -> SimResult:
    state = _SimState(plan, scene, model, config, workspace)
    transit = config.transit_height

    for i, action in enumerate(plan.steps):
        if isinstance(action, Grasp):
            box = state.world[action.object_id]
            x, y, _ = box.center
            top = box.center[2] + box.half_extents[2]
            pose = GraspPose(
                pre_grasp=(x, y, top + config.grasp_clearance), grasp=(x, y, top)
            )
            plan_segments = [
                ("transit", (x, y, transit)),
                ("approach", pose.pre_grasp),
                ("grasp", pose.grasp),
            ]
            for purpose, target in plan_segments:
                _, failure = _run_segment(state, i, action, purpose, target)
                if failure is not None:
                    return _finish(state, failure, action)
            state.held_id = action.object_id
            state.held_he = box.half_extents

        elif isinstance(action, Move):
            if state.held_id is not None:
                he = state.held_he
                rest = resting_center(action.target, he)
                conflicts = [
                    oid
                    for oid, box in state.world.items()
                    if oid != state.held_id
                    and aabb_overlap(Aabb(center=rest, half_extents=he), box)
                ]
                if conflicts:
                    named = ", ".join(f"'{c}'" for c in conflicts)
                    spot = suggest_free_placement(
                        state.world, he, rest, state.workspace,
                        ignore=frozenset({state.held_id}),
                    )
                    failure = SimFailure(
                        kind=FailureKind.COLLISION,
                        step_index=i,
                        detail=(
                            f"placing '{state.held_id}' at {fmt_vec3(rest)} would "
                            f"overlap {named}"
                        ),
                        suggestion=_suggestion_text(spot),
                    )
                    return _finish(state, failure, action)
                tcp_target = (rest[0], rest[1], rest[2] + he[2])
            else:
                tcp_target = tuple(action.target)

            cx, cy = float(state.tcp[0]), float(state.tcp[1])
            plan_segments = [
                ("lift", (cx, cy, transit)),
                ("carry", (tcp_target[0], tcp_target[1], transit)),
                ("place", tcp_target),
            ]
            for purpose, target in plan_segments:
                _, failure = _run_segment(state, i, action, purpose, target)
                if failure is not None:
                    return _finish(state, failure, action)

            # controller accuracy at move completion
            terminal_err = float(np.linalg.norm(state.tcp - np.asarray(tcp_target)))
            if terminal_err > config.placement_tolerance:
                failure = SimFailure(
                    kind=FailureKind.CONTROLLER_ERROR,
                    step_index=i,
                    detail=(
                        f"the controller finished {terminal_err * 1000:.1f} mm from "
                        f"{fmt_vec3(tcp_target)} (tolerance "
                        f"{config.placement_tolerance * 1000:.1f} mm)"
                    ),
                    suggestion="pick a target farther from the edge of the reachable area",
                )
                return _finish(state, failure, action)

            if state.held_id is not None:
                he = state.held_he
                rest = resting_center(action.target, he)
                released = state.held_id
                state.world[released] = Aabb(center=rest, half_extents=he)
                state.held_id = None
                state.held_he = None
                # the open gripper still straddles the released object until it
                # has retreated straight up out of contact
                _, failure = _run_segment(
                    state, i, action, "retreat",
                    (rest[0], rest[1], transit),
                    extra_excluded=frozenset({released}),
                )
                if failure is not None:
                    return _finish(state, failure, action)

        elif isinstance(action, Home):
            home_tcp, _ = forward_kinematics(model, model.home_config)
            cx, cy = float(state.tcp[0]), float(state.tcp[1])
            plan_segments = [
                ("lift", (cx, cy, transit)),
                ("home", tuple(home_tcp)),
            ]
            for purpose, target in plan_segments:
                _, failure = _run_segment(state, i, action, purpose, target)
                if failure is not None:
                    return _finish(state, failure, action)
            # same tool pose, canonical joint configuration
            state.q = np.asarray(model.home_config, dtype=float).copy()
            state.tcp = home_tcp

    return _finish(state, None, None)


def _finish(state: _SimState, failure: SimFailure | None, action) -> SimResult:
    if failure is None:
        return SimResult(verdict=SimSuccess(), feedback="success", segments=state.segments)
    text = (
        f"step {failure.step_index + 1} ({_describe_action(action)}) failed: "
        f"{failure.detail}. Suggestion: {failure.suggestion}"
    )
    return SimResult(verdict=failure, feedback=text, segments=state.segments)


def simulate_plan_traced(
    plan: Plan,
    scene: Scene,
    model: ArmModel,
    config: SimConfig,
    workspace: WorkspaceRegion,
) -> SimResult:
    """Full simulation with per-segment traces for independent re-checking."""
    return _simulate(plan, scene, model, config, workspace)


def simulate_plan(
    plan: Plan,
    scene: Scene,
    model: ArmModel,
    config: SimConfig,
    workspace: WorkspaceRegion,
) -> tuple[SimVerdict, str]:
    """Execute the plan quasi-statically; first failure wins.

    Returns the verdict plus directed feedback text ("success" on a clean run).
    """
    result = _simulate(plan, scene, model, config, workspace)
    return result.verdict, result.feedback
