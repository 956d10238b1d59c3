import json

import pytest
from hypothesis import given, strategies as st

from multitalk.errors import PlanParseError
from multitalk.model import (
    Grasp,
    Home,
    Move,
    ObjectObservation,
    Plan,
    Scene,
    fmt_float,
    parse_plan,
    scene_from_dict,
    scene_to_dict,
    serialize_plan,
    validate_plan_syntax,
)


def make_scene(*labels):
    objects = tuple(
        ObjectObservation(id=f"{lbl}_{i}", label=lbl, center=(0.4 + 0.1 * i, 0.0, 0.05),
                          half_extents=(0.03, 0.03, 0.05))
        for i, lbl in enumerate(labels)
    )
    return Scene(objects=objects)


class TestInvariants:
    def test_object_requires_positive_extents(self):
        with pytest.raises(ValueError):
            ObjectObservation("a", "apple", (0, 0, 0), (0.1, -0.1, 0.1))

    def test_object_requires_label(self):
        with pytest.raises(ValueError):
            ObjectObservation("a", "", (0, 0, 0), (0.1, 0.1, 0.1))

    def test_scene_rejects_duplicate_ids(self):
        obj = ObjectObservation("a", "apple", (0.4, 0, 0.05), (0.03, 0.03, 0.05))
        with pytest.raises(ValueError, match="duplicate"):
            Scene(objects=(obj, obj))

    def test_question_human_requires_questions(self):
        from multitalk.model import QuestionHuman

        with pytest.raises(ValueError):
            QuestionHuman(questions=())

    def test_feedback_requires_text_with_source(self):
        from multitalk.model import Feedback, FeedbackSource

        with pytest.raises(ValueError):
            Feedback(source=FeedbackSource.SIMULATOR, text="")
        Feedback(source=FeedbackSource.NONE)  # fine


class TestValidatePlanSyntax:
    def test_well_formed_plan_passes(self):
        scene = make_scene("apple", "soup_can")
        plan = Plan((Grasp("apple_0"), Move((0.4, 0.1, 0.05)), Home()))
        assert validate_plan_syntax(plan, scene) == []

    def test_unknown_object(self):
        scene = make_scene("apple", "soup_can")
        plan = Plan((Grasp("banana"),))
        assert validate_plan_syntax(plan, scene) == ["unknown object id 'banana' at step 1"]

    def test_grasp_while_holding(self):
        scene = make_scene("apple", "soup_can")
        plan = Plan((Grasp("apple_0"), Grasp("soup_can_1")))
        errors = validate_plan_syntax(plan, scene)
        assert "grasp while already holding at step 2" in errors

    def test_move_or_home_clears_hold(self):
        scene = make_scene("apple", "soup_can")
        plan = Plan((Grasp("apple_0"), Move((0.5, 0, 0.05)), Grasp("soup_can_1"), Home()))
        assert validate_plan_syntax(plan, scene) == []

    def test_deterministic(self):
        scene = make_scene("apple")
        plan = Plan((Grasp("nope"), Grasp("nope")))
        assert validate_plan_syntax(plan, scene) == validate_plan_syntax(plan, scene)


class TestPlanSerialization:
    def test_home_round_trip(self):
        plan = Plan((Home(),))
        text = serialize_plan(plan)
        assert text == '[{"action":"home"}]'
        assert parse_plan(text) == plan

    def test_move_parse(self):
        plan = parse_plan('[{"action":"move","target":[0.4,0.0,0.1]}]')
        assert plan == Plan((Move((0.4, 0.0, 0.1)),))

    def test_move_serialization_keeps_three_decimals(self):
        text = serialize_plan(Plan((Move((0.4, 0.0, 0.1)),)))
        assert text == '[{"action":"move","target":[0.400,0.000,0.100]}]'

    def test_missing_object_field(self):
        with pytest.raises(PlanParseError, match="missing field 'object' at step 1"):
            parse_plan('[{"action":"grasp"}]')

    def test_unknown_action(self):
        with pytest.raises(PlanParseError, match="unknown action 'jump' at step 2"):
            parse_plan('[{"action":"home"},{"action":"jump"}]')

    def test_non_numeric_coordinate(self):
        with pytest.raises(PlanParseError, match="non-numeric coordinate"):
            parse_plan('[{"action":"move","target":[0.1,"x",0.2]}]')

    def test_malformed_json(self):
        with pytest.raises(PlanParseError, match="not valid JSON"):
            parse_plan("gibberish")

    @given(
        st.lists(
            st.one_of(
                st.builds(Home),
                st.builds(Grasp, st.text(min_size=1, max_size=12)),
                st.builds(
                    Move,
                    st.tuples(
                        st.floats(-10, 10, allow_nan=False).map(lambda v: round(v, 6)),
                        st.floats(-10, 10, allow_nan=False).map(lambda v: round(v, 6)),
                        st.floats(-10, 10, allow_nan=False).map(lambda v: round(v, 6)),
                    ),
                ),
            ),
            max_size=12,
        )
    )
    def test_round_trip_identity(self, steps):
        plan = Plan(tuple(steps))
        assert parse_plan(serialize_plan(plan)) == plan


class TestSceneSerialization:
    def test_round_trip(self):
        scene = make_scene("apple", "soup_can")
        doc = scene_to_dict(scene)
        assert scene_from_dict(doc) == scene
        # and through actual JSON text
        assert scene_from_dict(json.loads(json.dumps(doc))) == scene


def test_fmt_float_minimum_three_decimals():
    assert fmt_float(0.4) == "0.400"
    assert fmt_float(1.0) == "1.000"
    assert fmt_float(0.123456789) == "0.123456789"
    assert float(fmt_float(0.1 + 0.2)) == 0.1 + 0.2


def test_fmt_float_handles_scientific():
    v = 1e-05
    assert float(fmt_float(v)) == v
