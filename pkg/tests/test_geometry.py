import numpy as np
import pytest
from hypothesis import given, strategies as st

from multitalk.geometry import (
    Aabb,
    DEFAULT_WORKSPACE,
    WorkspaceRegion,
    aabb_overlap,
    check_workspace_bounds,
    placement_conflicts,
    point_in_workspace,
)
from multitalk.model import Grasp, Home, Move, ObjectObservation, Plan, Scene

from oracles import boxes_overlap_oracle, placement_conflicts_oracle

finite = st.floats(-5, 5, allow_nan=False)
positive = st.floats(0.01, 1.0, allow_nan=False)
vec = st.tuples(finite, finite, finite)
he = st.tuples(positive, positive, positive)
boxes = st.builds(Aabb, center=vec, half_extents=he)


class TestAabbOverlap:
    def test_separated_boxes(self):
        a = Aabb((0, 0, 0), (0.05, 0.05, 0.05))
        b = Aabb((0.2, 0, 0), (0.05, 0.05, 0.05))
        assert not aabb_overlap(a, b)

    def test_identical_boxes(self):
        a = Aabb((0, 0, 0), (0.05, 0.05, 0.05))
        assert aabb_overlap(a, a)

    def test_touching_faces_count(self):
        a = Aabb((0, 0, 0), (0.05, 0.05, 0.05))
        b = Aabb((0.10, 0, 0), (0.05, 0.05, 0.05))
        assert aabb_overlap(a, b)

    @given(boxes, boxes)
    def test_symmetry(self, a, b):
        assert aabb_overlap(a, b) == aabb_overlap(b, a)

    @given(boxes, boxes, vec)
    def test_translation_invariance(self, a, b, t):
        at = Aabb(tuple(c + d for c, d in zip(a.center, t)), a.half_extents)
        bt = Aabb(tuple(c + d for c, d in zip(b.center, t)), b.half_extents)
        assert aabb_overlap(a, b) == aabb_overlap(at, bt)

    @given(boxes, boxes)
    def test_matches_corner_oracle(self, a, b):
        assert aabb_overlap(a, b) == boxes_overlap_oracle(
            a.center, a.half_extents, b.center, b.half_extents
        )


class TestPointInWorkspace:
    def test_center_inside(self):
        w = DEFAULT_WORKSPACE
        center = tuple((lo + hi) / 2 for lo, hi in zip(w.min_corner, w.max_corner))
        assert point_in_workspace(center, w)

    def test_min_corner_inside(self):
        w = DEFAULT_WORKSPACE
        assert point_in_workspace(w.min_corner, w)

    def test_just_outside(self):
        w = DEFAULT_WORKSPACE
        p = (w.max_corner[0] + 0.01, w.max_corner[1], w.max_corner[2])
        assert not point_in_workspace(p, w)

    def test_region_validation(self):
        with pytest.raises(ValueError):
            WorkspaceRegion((0, 0, 0), (1, -1, 1))


def scene_with(*objs):
    return Scene(objects=tuple(objs))


class TestCheckWorkspaceBounds:
    def test_all_inside_returns_empty(self):
        scene = scene_with(
            ObjectObservation("apple_0", "apple", (0.4, 0, 0.037), (0.037,) * 3)
        )
        plan = Plan((Grasp("apple_0"), Move((0.5, 0.1, 0.05)), Home()))
        assert check_workspace_bounds(plan, scene, DEFAULT_WORKSPACE) == ""

    def test_move_out_of_bounds_message(self):
        scene = scene_with()
        plan = Plan((Home(), Move((1.50, 0.0, 0.10))))
        msg = check_workspace_bounds(plan, scene, DEFAULT_WORKSPACE)
        assert msg == "step 2: target [1.50, 0.00, 0.10] is out of bounds (x exceeds 0.70)"

    def test_grasp_point_out_of_bounds(self):
        scene = scene_with(
            ObjectObservation("apple_0", "apple", (0.9, 0, 0.037), (0.037,) * 3)
        )
        plan = Plan((Grasp("apple_0"),))
        msg = check_workspace_bounds(plan, scene, DEFAULT_WORKSPACE)
        assert "out of bounds" in msg
        assert "apple_0" in msg

    def test_substring_contract(self):
        # "out of bounds" appears iff some checked point fails membership
        scene = scene_with(
            ObjectObservation("apple_0", "apple", (0.4, 0, 0.037), (0.037,) * 3)
        )
        rng = np.random.default_rng(7)
        for _ in range(200):
            target = tuple(rng.uniform((-0.2, -0.8, -0.1), (1.0, 0.8, 0.7)))
            plan = Plan((Move(target),))
            msg = check_workspace_bounds(plan, scene, DEFAULT_WORKSPACE)
            inside = point_in_workspace(target, DEFAULT_WORKSPACE)
            assert ("out of bounds" in msg) == (not inside)


class TestPlacementConflicts:
    def test_empty_region(self):
        scene = scene_with(
            ObjectObservation("apple_0", "apple", (0.4, 0, 0.037), (0.037,) * 3)
        )
        held = Aabb((0, 0, 0), (0.03, 0.03, 0.03))
        assert placement_conflicts((0.6, 0.3, 0.03), held, scene) == []

    def test_same_center_conflicts(self):
        scene = scene_with(
            ObjectObservation("apple_0", "apple", (0.4, 0, 0.037), (0.037,) * 3)
        )
        held = Aabb((0, 0, 0), (0.03, 0.03, 0.03))
        assert placement_conflicts((0.4, 0, 0.037), held, scene) == ["apple_0"]

    def test_two_overlapping_in_scene_order(self):
        a = ObjectObservation("a", "apple", (0.40, 0.0, 0.037), (0.037,) * 3)
        b = ObjectObservation("b", "apple", (0.44, 0.0, 0.037), (0.037,) * 3)
        scene = scene_with(a, b)
        held = Aabb((0, 0, 0), (0.05, 0.05, 0.05))
        assert placement_conflicts((0.42, 0.0, 0.05), held, scene) == ["a", "b"]

    def test_ignore_id(self):
        a = ObjectObservation("a", "apple", (0.40, 0.0, 0.037), (0.037,) * 3)
        scene = scene_with(a)
        held = Aabb((0, 0, 0), (0.037,) * 3)
        assert placement_conflicts((0.40, 0.0, 0.037), held, scene, ignore_id="a") == []

    def test_brute_force_equivalence_randomized(self):
        rng = np.random.default_rng(1234)
        for _ in range(1000):
            n = rng.integers(1, 8)
            objs = []
            for k in range(n):
                center = tuple(rng.uniform((0.25, -0.35, 0.0), (0.70, 0.35, 0.2)))
                hes = tuple(rng.uniform(0.01, 0.08, size=3))
                objs.append(ObjectObservation(f"o{k}", "thing", center, hes))
            scene = scene_with(*objs)
            target = tuple(rng.uniform((0.25, -0.35, 0.0), (0.70, 0.35, 0.2)))
            held_he = tuple(rng.uniform(0.01, 0.08, size=3))
            held = Aabb((0, 0, 0), held_he)
            ignore = objs[0].id if rng.random() < 0.3 else ""
            got = placement_conflicts(target, held, scene, ignore_id=ignore)
            want = placement_conflicts_oracle(target, held_he, scene, ignore)
            assert got == want
