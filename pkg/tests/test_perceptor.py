import pytest

from multitalk.errors import PlacementInfeasible
from multitalk.geometry import DEFAULT_WORKSPACE, aabb_overlap, object_box, point_in_workspace
from multitalk.model import Grasp, Home, Move, ObjectObservation, Plan, Scene
from multitalk.perceptor import (
    DetectionErrorSpec,
    SyntheticSource,
    apply_world_update,
    generate_environment_config,
    load_size_table,
    load_scene_file,
    save_scene_file,
)

CATALOG = ["sugar_box", "soup_can", "wooden_cube", "mustard_bottle", "apple"]


def truth_scene():
    return Scene(objects=(
        ObjectObservation("apple_0", "apple", (0.40, -0.15, 0.037), (0.037,) * 3),
        ObjectObservation("soup_can_0", "soup_can", (0.40, 0.15, 0.05),
                          (0.033, 0.033, 0.05)),
    ))


class TestSnapshotAndRescan:
    def test_identity_without_errors(self):
        src = SyntheticSource(ground_truth=truth_scene())
        snap = src.snapshot()
        assert snap.ids() == {"apple_0", "soup_can_0"}
        assert snap.viewpoint_id == 0
        assert src.snapshot() == snap  # repeatable

    def test_hidden_object(self):
        src = SyntheticSource(
            ground_truth=truth_scene(),
            errors=DetectionErrorSpec(hidden_ids={"apple_0"}),
        )
        assert src.snapshot().ids() == {"soup_can_0"}

    def test_mislabel_keeps_geometry(self):
        src = SyntheticSource(
            ground_truth=truth_scene(),
            errors=DetectionErrorSpec(mislabels={"apple_0": "ball"}),
        )
        obj = src.snapshot().get("apple_0")
        assert obj.label == "ball"
        assert obj.center == (0.40, -0.15, 0.037)

    def test_rescan_reveals_hidden(self):
        src = SyntheticSource(
            ground_truth=truth_scene(),
            errors=DetectionErrorSpec(hidden_ids={"apple_0"}, reveal_at_viewpoint=1),
        )
        scene = src.rescan()
        assert scene.viewpoint_id == 1
        assert "apple_0" in scene.ids()

    def test_rescan_without_errors_only_bumps_viewpoint(self):
        src = SyntheticSource(ground_truth=truth_scene())
        before = src.snapshot()
        after = src.rescan()
        assert after.viewpoint_id == 1
        assert after.objects == before.objects

    def test_reveal_threshold_not_reached(self):
        src = SyntheticSource(
            ground_truth=truth_scene(),
            errors=DetectionErrorSpec(hidden_ids={"apple_0"}, reveal_at_viewpoint=2),
        )
        assert "apple_0" not in src.rescan().ids()
        assert "apple_0" in src.rescan().ids()

    def test_monotone_detection(self):
        src = SyntheticSource(
            ground_truth=truth_scene(),
            errors=DetectionErrorSpec(
                hidden_ids={"apple_0"}, mislabels={"soup_can_0": "cup"},
                reveal_at_viewpoint=2,
            ),
        )
        correct_prev = set()
        truth_labels = {o.id: o.label for o in truth_scene().objects}
        for _ in range(4):
            scene = src.snapshot()
            correct = {
                o.id for o in scene.objects if truth_labels[o.id] == o.label
            }
            assert correct >= correct_prev
            correct_prev = correct
            src.rescan()

    def test_error_spec_validates_ids(self):
        from multitalk.errors import ConfigError

        with pytest.raises(ConfigError):
            SyntheticSource(
                ground_truth=truth_scene(),
                errors=DetectionErrorSpec(hidden_ids={"ghost"}),
            )


class TestGenerateEnvironment:
    def test_deterministic_in_seed(self):
        a = generate_environment_config("T3", CATALOG, 4, seed=7)
        b = generate_environment_config("T3", CATALOG, 4, seed=7)
        assert a == b

    def test_different_seeds_differ(self):
        a = generate_environment_config("T3", CATALOG, 4, seed=7)
        b = generate_environment_config("T3", CATALOG, 4, seed=8)
        assert a != b

    def test_five_objects_valid(self):
        scene = generate_environment_config("T1", CATALOG, 5, seed=3)
        assert len(scene.objects) == 5
        for o in scene.objects:
            assert point_in_workspace(o.center, DEFAULT_WORKSPACE)
            assert o.center[2] == pytest.approx(o.half_extents[2])
        boxes = [object_box(o) for o in scene.objects]
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                assert not aabb_overlap(boxes[i], boxes[j])

    def test_overpacked_scene_infeasible(self):
        with pytest.raises(PlacementInfeasible):
            generate_environment_config("T1", CATALOG, 500, seed=0)

    def test_require_labels_first(self):
        scene = generate_environment_config(
            "T2", CATALOG, 3, seed=11, require_labels=("apple",)
        )
        labels = [o.label for o in scene.objects]
        assert labels[0] == "apple"

    def test_invariants_over_many_seeds(self):
        clearance = 0.02
        for seed in range(1000):
            n = 2 + seed % 5
            scene = generate_environment_config("Tx", CATALOG, n, seed=seed,
                                                min_clearance=clearance)
            objs = scene.objects
            assert len({o.id for o in objs}) == n
            for o in objs:
                assert point_in_workspace(o.center, DEFAULT_WORKSPACE)
            for i in range(n):
                for j in range(i + 1, n):
                    a, b = objs[i], objs[j]
                    # face separation of at least the configured clearance
                    gaps = [
                        abs(a.center[k] - b.center[k])
                        - a.half_extents[k] - b.half_extents[k]
                        for k in range(3)
                    ]
                    assert max(gaps) >= clearance - 1e-9


class TestWorldUpdate:
    def test_grasp_move_home(self):
        src = SyntheticSource(ground_truth=truth_scene())
        plan = Plan((Grasp("apple_0"), Move((0.6, 0.2, 0.3)), Home()))
        scene = apply_world_update(src, plan)
        apple = scene.get("apple_0")
        assert apple.center == (0.6, 0.2, 0.037)  # rests on the table

    def test_home_only_is_noop(self):
        src = SyntheticSource(ground_truth=truth_scene())
        before = src.snapshot()
        assert apply_world_update(src, Plan((Home(),))) == before

    def test_two_relocations(self):
        src = SyntheticSource(ground_truth=truth_scene())
        plan = Plan((
            Grasp("apple_0"), Move((0.6, -0.3, 0.037)),
            Grasp("soup_can_0"), Move((0.6, 0.3, 0.05)),
        ))
        scene = apply_world_update(src, plan)
        assert scene.get("apple_0").center == (0.6, -0.3, 0.037)
        assert scene.get("soup_can_0").center == (0.6, 0.3, 0.05)

    def test_regrasp_takes_final_target(self):
        src = SyntheticSource(ground_truth=truth_scene())
        plan = Plan((
            Grasp("apple_0"), Move((0.6, -0.3, 0.037)),
            Grasp("apple_0"), Move((0.5, 0.25, 0.037)),
        ))
        scene = apply_world_update(src, plan)
        assert scene.get("apple_0").center == (0.5, 0.25, 0.037)


class TestSceneFiles:
    def test_round_trip_with_errors(self, tmp_path):
        path = tmp_path / "scene.json"
        errors = DetectionErrorSpec(hidden_ids={"apple_0"},
                                    mislabels={"soup_can_0": "cup"},
                                    reveal_at_viewpoint=2)
        save_scene_file(path, truth_scene(), errors)
        src = load_scene_file(path)
        assert src.ground_truth == truth_scene()
        assert src.errors == errors

    def test_size_table_loads(self):
        table = load_size_table()
        assert set(table) >= {"sugar_box", "soup_can", "wooden_cube",
                              "mustard_bottle", "apple"}
        assert table["apple"] == (0.037, 0.037, 0.037)
