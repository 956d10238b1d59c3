import math

import numpy as np
import pytest

from multitalk.errors import ConfigError
from multitalk.kinesim import (
    ArmModel,
    condition_number,
    forward_kinematics,
    jacobian,
    parse_model,
)

from oracles import condition_oracle, fk_oracle, jacobian_fd_oracle, joint_axes_oracle


def random_configs(model, n, seed):
    rng = np.random.default_rng(seed)
    lo, hi = model.joint_limits[:, 0], model.joint_limits[:, 1]
    return rng.uniform(lo, hi, size=(n, 7))


def degenerate_model():
    return ArmModel(
        dh=np.zeros((7, 4)),
        flange=np.zeros(4),
        joint_limits=np.tile([-3.0, 3.0], (7, 1)),
        max_joint_speed=1.0,
        home_config=np.zeros(7),
    )


class TestForwardKinematics:
    def test_degenerate_model_stays_at_base(self):
        model = degenerate_model()
        rng = np.random.default_rng(0)
        for _ in range(10):
            q = rng.uniform(-3, 3, size=7)
            p, R = forward_kinematics(model, q)
            assert np.allclose(p, 0.0)

    def test_matches_transform_composition_oracle(self, arm_model):
        for q in random_configs(arm_model, 50, seed=42):
            p, R = forward_kinematics(arm_model, q)
            p_ref, R_ref = fk_oracle(arm_model, q)
            assert np.linalg.norm(p - p_ref) < 1e-9
            assert np.abs(R - R_ref).max() < 1e-9

    def test_home_pose_points_down(self, arm_model):
        p, R = forward_kinematics(arm_model, arm_model.home_config)
        assert R[2, 2] < -0.999  # tool z along -z
        assert 0.2 < p[0] < 0.7 and abs(p[1]) < 0.05 and 0.2 < p[2] < 0.55

    def test_base_joint_rotation_mirrors_position(self, arm_model):
        q = arm_model.home_config.copy()
        p0, _ = forward_kinematics(arm_model, q)
        q2 = q.copy()
        q2[0] += math.pi
        p1, _ = forward_kinematics(arm_model, q2)
        # rotating joint 1 by pi mirrors x and y about the base axis
        assert np.linalg.norm(p1 - np.array([-p0[0], -p0[1], p0[2]])) < 1e-9


class TestJacobian:
    def test_matches_finite_differences(self, arm_model):
        for q in random_configs(arm_model, 20, seed=7):
            J = jacobian(arm_model, q)
            J_fd = jacobian_fd_oracle(arm_model, q, forward_kinematics)
            assert np.abs(J - J_fd).max() < 1e-6

    def test_degenerate_model_zero_linear_rows(self):
        model = degenerate_model()
        J = jacobian(model, np.zeros(7))
        assert np.allclose(J[:3, :], 0.0)

    def test_angular_rows_are_joint_axes(self, arm_model):
        for q in random_configs(arm_model, 10, seed=3):
            J = jacobian(arm_model, q)
            axes = joint_axes_oracle(arm_model, q)
            for j in range(7):
                assert np.linalg.norm(J[3:, j] - axes[j]) < 1e-9


class TestConditionNumber:
    def test_orthonormal_rows_give_one(self):
        J = np.zeros((6, 7))
        J[:, :6] = np.eye(6) * 2.5
        assert condition_number(J) == pytest.approx(1.0)

    def test_zero_row_gives_infinity(self):
        J = np.random.default_rng(0).normal(size=(6, 7))
        J[3, :] = 0.0
        assert condition_number(J) == math.inf

    def test_matches_eigen_oracle_on_random_matrices(self):
        rng = np.random.default_rng(99)
        for _ in range(100):
            J = rng.normal(size=(6, 7))
            got = condition_number(J)
            want = condition_oracle(J)
            assert got == pytest.approx(want, rel=1e-9)

    def test_scale_invariance(self):
        rng = np.random.default_rng(5)
        J = rng.normal(size=(6, 7))
        for c in (0.01, 3.0, 1e4):
            assert condition_number(c * J) == pytest.approx(condition_number(J), rel=1e-9)


class TestModelFileParsing:
    def test_default_model_loads(self, arm_model):
        assert arm_model.dh.shape == (7, 4)
        assert arm_model.joint_limits.shape == (7, 2)

    def test_rejects_bad_row_counts(self):
        with pytest.raises(ConfigError, match="expected 7 dh rows"):
            parse_model("dh 0 0 0 0\nflange 0 0 0 0\nmax_joint_speed 1\n")

    def test_rejects_home_outside_limits(self):
        rows = ["dh 0 0.1 0 0"] * 7 + ["flange 0 0.1 0 0"] + ["limit -1 1"] * 7
        rows += ["max_joint_speed 1", "home 0 0 0 0 0 0 2"]
        with pytest.raises(ConfigError, match="home config"):
            parse_model("\n".join(rows))

    def test_rejects_non_numeric(self):
        with pytest.raises(ConfigError, match="non-numeric"):
            parse_model("dh a b c d\n")
