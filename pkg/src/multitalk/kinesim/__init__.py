"""Kinematic feasibility simulator: arm model, kinematics, trajectories, and
plan checking with directed failure feedback."""

from .arm import ArmModel, SimConfig, default_model, load_model, parse_model
from .kinematics import TOP_DOWN_ROTATION, condition_number, forward_kinematics, jacobian
from .simulate import (
    FailureKind,
    GraspPose,
    SimFailure,
    SimResult,
    SimSuccess,
    SimVerdict,
    grasp_resolution,
    simulate_plan,
    simulate_plan_traced,
    suggest_free_placement,
)
from .trajectory import Trajectory, plan_trajectory

__all__ = [
    "ArmModel",
    "SimConfig",
    "default_model",
    "load_model",
    "parse_model",
    "TOP_DOWN_ROTATION",
    "condition_number",
    "forward_kinematics",
    "jacobian",
    "FailureKind",
    "GraspPose",
    "SimFailure",
    "SimResult",
    "SimSuccess",
    "SimVerdict",
    "grasp_resolution",
    "simulate_plan",
    "simulate_plan_traced",
    "suggest_free_placement",
    "Trajectory",
    "plan_trajectory",
]
