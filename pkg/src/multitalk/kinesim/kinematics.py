"""Public kinematics surface over the kernel backends."""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .arm import ArmModel

# Tool orientation used for every grasp and placement: z straight down.
TOP_DOWN_ROTATION = np.array([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]])
TOP_DOWN_ROTATION.setflags(write=False)


def forward_kinematics(model: ArmModel, q) -> tuple[np.ndarray, np.ndarray]:
    """End-effector pose at q: (position, 3x3 rotation), base frame."""
    return kernels.fk_pose(model.dh, model.flange, np.asarray(q, dtype=float))


def jacobian(model: ArmModel, q) -> np.ndarray:
    """Geometric Jacobian at q: 6x7, linear rows then angular rows."""
    return kernels.jacobian(model.dh, model.flange, np.asarray(q, dtype=float))


def condition_number(J) -> float:
    """Ratio of largest to smallest singular value; +inf below 1e-12."""
    s = np.linalg.svd(np.asarray(J, dtype=float), compute_uv=False)
    if s[-1] < 1e-12:
        return math.inf
    return float(s[0] / s[-1])
