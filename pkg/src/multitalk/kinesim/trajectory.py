"""Straight-segment trajectory generation via resolved-rate inverse kinematics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .arm import ArmModel, SimConfig
from .kinematics import TOP_DOWN_ROTATION


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Tracked segment: one row per waypoint, first row is the start config."""

    waypoints: np.ndarray  # (W, 7)
    positions: np.ndarray  # (W, 3) end-effector positions
    condition_numbers: np.ndarray  # (W,)
    reached: bool
    stalled: bool
    closest_approach: float
    iterations: int

    def __len__(self) -> int:
        return len(self.waypoints)


def plan_trajectory(
    model: ArmModel,
    config: SimConfig,
    from_q,
    to_position,
    to_rotation=None,
) -> Trajectory:
    """Track the straight task-space segment from FK(from_q) to to_position.

    Waypoint positions stay within trajectory_sample_spacing of the segment;
    when `reached`, the final position error is at most placement_tolerance.
    Otherwise the result carries the closest approach to the target (the IK
    stalled or ran out of its iteration budget: the caller decides between an
    unreachable target and a controller precision failure).
    """
    if to_rotation is None:
        to_rotation = TOP_DOWN_ROTATION
    qs, ps, conds, status, closest, iters = kernels.track_segment(
        model.dh,
        model.flange,
        np.asarray(from_q, dtype=float),
        np.asarray(to_position, dtype=float),
        np.asarray(to_rotation, dtype=float),
        config.trajectory_sample_spacing,
        config.ik_gain,
        config.placement_tolerance,
        config.ik_max_iterations,
        q_posture=model.home_config,
    )
    return Trajectory(
        waypoints=qs,
        positions=ps,
        condition_numbers=conds,
        reached=status == kernels.REACHED,
        stalled=status == kernels.STALLED,
        closest_approach=closest,
        iterations=iters,
    )
