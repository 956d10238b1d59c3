"""Pure-numpy kinematics kernels.

Mirrors the API of the compiled module `multitalk.kinesim._native`; selected
as a fallback when the extension is unavailable (or forced via the
MULTITALK_PURE_PYTHON environment variable).

Conventions: standard Denavit-Hartenberg rows (a, d, alpha, theta_offset),
joint transform RotZ(q + offset) . TransZ(d) . TransX(a) . RotX(alpha), plus
one fixed flange row of the same shape with a constant theta.
"""

from __future__ import annotations

import math

import numpy as np

# track_segment status codes (shared with the compiled kernel)
REACHED = 0
STALLED = 1
BUDGET_EXHAUSTED = 2

_STALL_EPS = 1e-6
_DAMPING = 0.01
_NULLSPACE_GAIN = 0.2


def _dh_matrix(a: float, d: float, alpha: float, theta: float) -> np.ndarray:
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.array(
        [
            [ct, -st * ca, st * sa, a * ct],
            [st, ct * ca, -ct * sa, a * st],
            [0.0, sa, ca, d],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def _frames(dh: np.ndarray, flange: np.ndarray, q: np.ndarray) -> list[np.ndarray]:
    """Cumulative transforms [T0..T7, T_tool]; T0 is the base identity."""
    frames = [np.eye(4)]
    T = np.eye(4)
    for i in range(dh.shape[0]):
        a, d, alpha, offset = dh[i]
        T = T @ _dh_matrix(a, d, alpha, q[i] + offset)
        frames.append(T.copy())
    a, d, alpha, theta = flange
    frames.append(T @ _dh_matrix(a, d, alpha, theta))
    return frames


def fk_pose(dh: np.ndarray, flange: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """End-effector pose: (position, rotation matrix)."""
    T = _frames(dh, flange, q)[-1]
    return T[:3, 3].copy(), T[:3, :3].copy()


def jacobian(dh: np.ndarray, flange: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Geometric Jacobian, 6x7: linear rows on top, angular rows below.

    Column j uses the cross-product form for revolute joints: the joint axis is
    the z axis of the frame preceding joint j.
    """
    frames = _frames(dh, flange, q)
    p_ee = frames[-1][:3, 3]
    n = dh.shape[0]
    J = np.zeros((6, n))
    for j in range(n):
        z = frames[j][:3, 2]
        o = frames[j][:3, 3]
        J[:3, j] = np.cross(z, p_ee - o)
        J[3:, j] = z
    return J


def _orientation_error(R: np.ndarray, R_goal: np.ndarray) -> np.ndarray:
    return 0.5 * (
        np.cross(R[:, 0], R_goal[:, 0])
        + np.cross(R[:, 1], R_goal[:, 1])
        + np.cross(R[:, 2], R_goal[:, 2])
    )


def _cond_from_jacobian(J: np.ndarray) -> float:
    s = np.linalg.svd(J, compute_uv=False)
    smin = s[-1]
    if smin < 1e-12:
        return math.inf
    return float(s[0] / smin)


def track_segment(
    dh: np.ndarray,
    flange: np.ndarray,
    q0: np.ndarray,
    p_goal: np.ndarray,
    R_goal: np.ndarray,
    spacing: float,
    gain: float,
    tol: float,
    max_iters: int,
    q_posture: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int, float, int]:
    """Resolved-rate tracking of the straight task-space segment from the
    current end-effector position to p_goal, holding R_goal.

    The redundant degree of freedom is biased toward q_posture through the
    Jacobian null space, which keeps the elbow centered across consecutive
    segments instead of drifting toward awkward folds.

    Returns (waypoint configs Wx7, their positions Wx3, their Jacobian
    condition numbers W, status, closest approach to p_goal in meters,
    iterations used). Waypoint 0 is q0 itself. Status REACHED means the final
    position error is at most tol; STALLED means per-iteration progress fell
    below 1e-6 m; BUDGET_EXHAUSTED means max_iters was hit first.
    """
    q = np.asarray(q0, dtype=float).copy()
    p, R = fk_pose(dh, flange, q)
    qs = [q.copy()]
    ps = [p.copy()]
    conds = [_cond_from_jacobian(jacobian(dh, flange, q))]

    p_start = p.copy()
    seg = np.asarray(p_goal, dtype=float) - p_start
    length = float(np.linalg.norm(seg))
    closest = float(np.linalg.norm(p_goal - p))
    iters = 0

    def _result(status: int):
        return (np.array(qs), np.array(ps), np.array(conds), status, closest, iters)

    if length < 1e-12:
        return _result(REACHED)

    n_sub = max(1, math.ceil(length / spacing))
    inner_tol = min(spacing / 5.0, tol)
    lam2 = _DAMPING * _DAMPING
    eye7 = np.eye(dh.shape[0])

    for k in range(1, n_sub + 1):
        p_sub = p_start + seg * (k / n_sub)
        accept = tol if k == n_sub else inner_tol
        while True:
            err_p = p_sub - p
            if np.linalg.norm(err_p) <= accept:
                qs.append(q.copy())
                ps.append(p.copy())
                conds.append(_cond_from_jacobian(jacobian(dh, flange, q)))
                break
            if iters >= max_iters:
                return _result(BUDGET_EXHAUSTED)
            J = jacobian(dh, flange, q)
            e = np.concatenate([gain * err_p, gain * _orientation_error(R, R_goal)])
            JJt = J @ J.T
            JJt[np.diag_indices(6)] += lam2
            Jpinv = J.T @ np.linalg.inv(JJt)
            dq = Jpinv @ e
            if q_posture is not None:
                dq = dq + _NULLSPACE_GAIN * (eye7 - Jpinv @ J) @ (q_posture - q)
            q = q + dq
            p_new, R = fk_pose(dh, flange, q)
            progress = float(np.linalg.norm(p_new - p))
            p = p_new
            iters += 1
            closest = min(closest, float(np.linalg.norm(p_goal - p)))
            if progress < _STALL_EPS:
                return _result(STALLED)

    return _result(REACHED)
