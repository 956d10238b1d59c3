# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kinematics kernels: forward kinematics, geometric Jacobian, and the
resolved-rate segment tracker. API-compatible with kernels._reference."""

import math

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, atan2, cos, fabs, sin, sqrt

cnp.import_array()

REACHED = 0
STALLED = 1
BUDGET_EXHAUSTED = 2

cdef double _STALL_EPS = 1e-6
cdef double _DAMPING = 0.01
cdef double _NULLSPACE_GAIN = 0.2

DEF MAXJ = 16


cdef void _dh_fill(double a, double d, double alpha, double theta, double T[4][4]) nogil:
    cdef double ct = cos(theta), st = sin(theta)
    cdef double ca = cos(alpha), sa = sin(alpha)
    T[0][0] = ct; T[0][1] = -st * ca; T[0][2] = st * sa;  T[0][3] = a * ct
    T[1][0] = st; T[1][1] = ct * ca;  T[1][2] = -ct * sa; T[1][3] = a * st
    T[2][0] = 0;  T[2][1] = sa;       T[2][2] = ca;       T[2][3] = d
    T[3][0] = 0;  T[3][1] = 0;        T[3][2] = 0;        T[3][3] = 1


cdef void _mat4_mul(double A[4][4], double B[4][4], double C[4][4]) nogil:
    cdef int i, j, k
    cdef double acc
    for i in range(4):
        for j in range(4):
            acc = 0
            for k in range(4):
                acc += A[i][k] * B[k][j]
            C[i][j] = acc


cdef void _frames(const double[:, ::1] dh, const double[::1] flange, const double* q, int n,
                  double frames[MAXJ + 2][4][4]) nogil:
    """Cumulative transforms: frames[0] = I, frames[k] after joint k, last = tool."""
    cdef int i, r, c
    cdef double A[4][4]
    cdef double T[4][4]
    for r in range(4):
        for c in range(4):
            frames[0][r][c] = 1.0 if r == c else 0.0
    for i in range(n):
        _dh_fill(dh[i, 0], dh[i, 1], dh[i, 2], q[i] + dh[i, 3], A)
        _mat4_mul(frames[i], A, frames[i + 1])
    _dh_fill(flange[0], flange[1], flange[2], flange[3], A)
    _mat4_mul(frames[n], A, frames[n + 1])


cdef void _jacobian_c(double frames[MAXJ + 2][4][4], int n, double J[6][MAXJ]) nogil:
    cdef int j
    cdef double zx, zy, zz, dx, dy, dz
    cdef double px = frames[n + 1][0][3]
    cdef double py = frames[n + 1][1][3]
    cdef double pz = frames[n + 1][2][3]
    for j in range(n):
        zx = frames[j][0][2]; zy = frames[j][1][2]; zz = frames[j][2][2]
        dx = px - frames[j][0][3]; dy = py - frames[j][1][3]; dz = pz - frames[j][2][3]
        J[0][j] = zy * dz - zz * dy
        J[1][j] = zz * dx - zx * dz
        J[2][j] = zx * dy - zy * dx
        J[3][j] = zx
        J[4][j] = zy
        J[5][j] = zz


cdef double _cond_from_jjt(double J[6][MAXJ], int n) nogil:
    """Condition number of J from the eigenvalues of J.J^T (cyclic Jacobi)."""
    cdef double A[6][6]
    cdef int i, j, k, p, q, sweep
    cdef double acc, off, theta, c, s, aip, aiq, lmax, lmin
    for i in range(6):
        for j in range(6):
            acc = 0
            for k in range(n):
                acc += J[i][k] * J[j][k]
            A[i][j] = acc
    for sweep in range(50):
        off = 0
        for p in range(5):
            for q in range(p + 1, 6):
                off += A[p][q] * A[p][q]
        if off < 1e-32:
            break
        for p in range(5):
            for q in range(p + 1, 6):
                if fabs(A[p][q]) < 1e-300:
                    continue
                theta = 0.5 * atan2(2.0 * A[p][q], A[q][q] - A[p][p])
                c = cos(theta); s = sin(theta)
                for i in range(6):
                    aip = A[i][p]; aiq = A[i][q]
                    A[i][p] = c * aip - s * aiq
                    A[i][q] = s * aip + c * aiq
                for i in range(6):
                    aip = A[p][i]; aiq = A[q][i]
                    A[p][i] = c * aip - s * aiq
                    A[q][i] = s * aip + c * aiq
    lmax = A[0][0]; lmin = A[0][0]
    for i in range(1, 6):
        if A[i][i] > lmax:
            lmax = A[i][i]
        if A[i][i] < lmin:
            lmin = A[i][i]
    if lmin < 1e-24:
        return INFINITY
    return sqrt(lmax / lmin)


cdef int _solve6(double M[6][6], double* b, double* x) nogil:
    """Solve M x = b by Gaussian elimination with partial pivoting.

    M and b are clobbered. Returns 0 on success, 1 on (numerically) singular.
    """
    cdef int i, j, k, piv
    cdef double best, factor, tmp
    for k in range(6):
        piv = k
        best = fabs(M[k][k])
        for i in range(k + 1, 6):
            if fabs(M[i][k]) > best:
                best = fabs(M[i][k]); piv = i
        if best < 1e-300:
            return 1
        if piv != k:
            for j in range(6):
                tmp = M[k][j]; M[k][j] = M[piv][j]; M[piv][j] = tmp
            tmp = b[k]; b[k] = b[piv]; b[piv] = tmp
        for i in range(k + 1, 6):
            factor = M[i][k] / M[k][k]
            for j in range(k, 6):
                M[i][j] -= factor * M[k][j]
            b[i] -= factor * b[k]
    for i in range(5, -1, -1):
        tmp = b[i]
        for j in range(i + 1, 6):
            tmp -= M[i][j] * x[j]
        x[i] = tmp / M[i][i]
    return 0


def fk_pose(dh, flange, q):
    """End-effector pose: (position, rotation matrix)."""
    cdef const double[:, ::1] dh_v = np.ascontiguousarray(dh, dtype=np.float64)
    cdef const double[::1] fl_v = np.ascontiguousarray(flange, dtype=np.float64)
    cdef const double[::1] q_v = np.ascontiguousarray(q, dtype=np.float64)
    cdef int n = dh_v.shape[0]
    if n > MAXJ:
        raise ValueError("too many joints")
    cdef double frames[MAXJ + 2][4][4]
    _frames(dh_v, fl_v, &q_v[0], n, frames)
    p = np.empty(3)
    R = np.empty((3, 3))
    cdef double[::1] p_v = p
    cdef double[:, ::1] R_v = R
    cdef int i, j
    for i in range(3):
        p_v[i] = frames[n + 1][i][3]
        for j in range(3):
            R_v[i, j] = frames[n + 1][i][j]
    return p, R


def jacobian(dh, flange, q):
    """Geometric Jacobian, 6xN: linear rows on top, angular rows below."""
    cdef const double[:, ::1] dh_v = np.ascontiguousarray(dh, dtype=np.float64)
    cdef const double[::1] fl_v = np.ascontiguousarray(flange, dtype=np.float64)
    cdef const double[::1] q_v = np.ascontiguousarray(q, dtype=np.float64)
    cdef int n = dh_v.shape[0]
    if n > MAXJ:
        raise ValueError("too many joints")
    cdef double frames[MAXJ + 2][4][4]
    cdef double Jc[6][MAXJ]
    _frames(dh_v, fl_v, &q_v[0], n, frames)
    _jacobian_c(frames, n, Jc)
    J = np.empty((6, n))
    cdef double[:, ::1] J_v = J
    cdef int i, j
    for i in range(6):
        for j in range(n):
            J_v[i, j] = Jc[i][j]
    return J


def track_segment(dh, flange, q0, p_goal, R_goal, double spacing, double gain,
                  double tol, int max_iters, q_posture=None):
    """Resolved-rate tracking of the straight task-space segment from the
    current end-effector position to p_goal, holding R_goal. See the reference
    kernel for the full contract."""
    cdef const double[:, ::1] dh_v = np.ascontiguousarray(dh, dtype=np.float64)
    cdef const double[::1] fl_v = np.ascontiguousarray(flange, dtype=np.float64)
    cdef const double[::1] goal_v = np.ascontiguousarray(p_goal, dtype=np.float64)
    cdef const double[:, ::1] Rg = np.ascontiguousarray(R_goal, dtype=np.float64)
    cdef int n = dh_v.shape[0]
    if n > MAXJ:
        raise ValueError("too many joints")

    cdef bint use_posture = q_posture is not None
    cdef const double[::1] posture_v
    if use_posture:
        posture_v = np.ascontiguousarray(q_posture, dtype=np.float64)
    else:
        posture_v = np.zeros(n)

    cdef double q[MAXJ]
    cdef const double[::1] q0_v = np.ascontiguousarray(q0, dtype=np.float64)
    cdef int i, j, k
    for i in range(n):
        q[i] = q0_v[i]

    cdef double frames[MAXJ + 2][4][4]
    cdef double Jc[6][MAXJ]
    _frames(dh_v, fl_v, q, n, frames)
    cdef double p[3]
    cdef double R[3][3]
    for i in range(3):
        p[i] = frames[n + 1][i][3]
        for j in range(3):
            R[i][j] = frames[n + 1][i][j]

    cdef double p_start[3]
    cdef double seg[3]
    cdef double length = 0
    for i in range(3):
        p_start[i] = p[i]
        seg[i] = goal_v[i] - p[i]
        length += seg[i] * seg[i]
    length = sqrt(length)

    cdef double closest = 0
    for i in range(3):
        closest += (goal_v[i] - p[i]) * (goal_v[i] - p[i])
    closest = sqrt(closest)

    cdef int n_sub = 0
    if length >= 1e-12:
        n_sub = <int>math.ceil(length / spacing)
        if n_sub < 1:
            n_sub = 1

    # Waypoints: start config plus one per subtarget.
    qs = np.empty((n_sub + 1, n))
    ps = np.empty((n_sub + 1, 3))
    conds = np.empty(n_sub + 1)
    cdef double[:, ::1] qs_v = qs
    cdef double[:, ::1] ps_v = ps
    cdef double[::1] conds_v = conds
    cdef int n_way = 0

    _jacobian_c(frames, n, Jc)
    for i in range(n):
        qs_v[0, i] = q[i]
    for i in range(3):
        ps_v[0, i] = p[i]
    conds_v[0] = _cond_from_jjt(Jc, n)
    n_way = 1

    cdef int iters = 0
    cdef int status = REACHED
    cdef double inner_tol = spacing / 5.0
    if tol < inner_tol:
        inner_tol = tol
    cdef double lam2 = _DAMPING * _DAMPING

    cdef double p_sub[3]
    cdef double err_p[3]
    cdef double e[6]
    cdef double M[6][6]
    cdef double Mw[6][6]
    cdef double rhs[6]
    cdef double t6[6]
    cdef double v7[MAXJ]
    cdef double w6[6]
    cdef double dq[MAXJ]
    cdef double accept, err_norm, acc, progress, dist
    cdef double p_new[3]
    cdef int k2
    cdef bint stalled = False, budget = False

    with nogil:
        for k in range(1, n_sub + 1):
            for i in range(3):
                p_sub[i] = p_start[i] + seg[i] * (<double>k / n_sub)
            accept = tol if k == n_sub else inner_tol
            while True:
                err_norm = 0
                for i in range(3):
                    err_p[i] = p_sub[i] - p[i]
                    err_norm += err_p[i] * err_p[i]
                err_norm = sqrt(err_norm)
                if err_norm <= accept:
                    _jacobian_c(frames, n, Jc)
                    for i in range(n):
                        qs_v[n_way, i] = q[i]
                    for i in range(3):
                        ps_v[n_way, i] = p[i]
                    conds_v[n_way] = _cond_from_jjt(Jc, n)
                    n_way += 1
                    break
                if iters >= max_iters:
                    budget = True
                    break

                _jacobian_c(frames, n, Jc)
                # task error: gain * [position error; orientation error]
                for i in range(3):
                    e[i] = gain * err_p[i]
                e[3] = gain * 0.5 * ((R[1][0] * Rg[2, 0] - R[2][0] * Rg[1, 0])
                                     + (R[1][1] * Rg[2, 1] - R[2][1] * Rg[1, 1])
                                     + (R[1][2] * Rg[2, 2] - R[2][2] * Rg[1, 2]))
                e[4] = gain * 0.5 * ((R[2][0] * Rg[0, 0] - R[0][0] * Rg[2, 0])
                                     + (R[2][1] * Rg[0, 1] - R[0][1] * Rg[2, 1])
                                     + (R[2][2] * Rg[0, 2] - R[0][2] * Rg[2, 2]))
                e[5] = gain * 0.5 * ((R[0][0] * Rg[1, 0] - R[1][0] * Rg[0, 0])
                                     + (R[0][1] * Rg[1, 1] - R[1][1] * Rg[0, 1])
                                     + (R[0][2] * Rg[1, 2] - R[1][2] * Rg[0, 2]))

                # M = J.J^T + damping^2 I
                for i in range(6):
                    for j in range(6):
                        acc = 0
                        for k2 in range(n):
                            acc += Jc[i][k2] * Jc[j][k2]
                        M[i][j] = acc
                    M[i][i] += lam2

                # dq = J^T M^-1 e  (+ null-space posture pull)
                for i in range(6):
                    for j in range(6):
                        Mw[i][j] = M[i][j]
                    rhs[i] = e[i]
                if _solve6(Mw, rhs, t6):
                    stalled = True
                    break
                for i in range(n):
                    acc = 0
                    for j in range(6):
                        acc += Jc[j][i] * t6[j]
                    dq[i] = acc
                if use_posture:
                    for i in range(n):
                        v7[i] = _NULLSPACE_GAIN * (posture_v[i] - q[i])
                    for i in range(6):
                        acc = 0
                        for j in range(n):
                            acc += Jc[i][j] * v7[j]
                        w6[i] = acc
                    for i in range(6):
                        for j in range(6):
                            Mw[i][j] = M[i][j]
                        rhs[i] = w6[i]
                    if _solve6(Mw, rhs, t6):
                        stalled = True
                        break
                    for i in range(n):
                        acc = 0
                        for j in range(6):
                            acc += Jc[j][i] * t6[j]
                        dq[i] += v7[i] - acc

                for i in range(n):
                    q[i] += dq[i]
                _frames(dh_v, fl_v, q, n, frames)
                progress = 0
                for i in range(3):
                    p_new[i] = frames[n + 1][i][3]
                    progress += (p_new[i] - p[i]) * (p_new[i] - p[i])
                progress = sqrt(progress)
                dist = 0
                for i in range(3):
                    p[i] = p_new[i]
                    dist += (goal_v[i] - p[i]) * (goal_v[i] - p[i])
                    for j in range(3):
                        R[i][j] = frames[n + 1][i][j]
                dist = sqrt(dist)
                if dist < closest:
                    closest = dist
                iters += 1
                if progress < _STALL_EPS:
                    stalled = True
                    break
            if stalled or budget:
                break

    if stalled:
        status = STALLED
    elif budget:
        status = BUDGET_EXHAUSTED
    else:
        status = REACHED

    return (np.asarray(qs[:n_way]).copy(), np.asarray(ps[:n_way]).copy(),
            np.asarray(conds[:n_way]).copy(), status, closest, iters)
