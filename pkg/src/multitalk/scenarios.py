"""Canned scripted-agent scenarios.

Each scenario bundles a scene, deterministic planner/analyzer scripts, and any
scripted human answers, so the full loop can be exercised (and replayed
byte-for-byte) without a live model. The interchange scenario reproduces the
classic two-object swap walkthrough: a naive direct swap drawing an analyzer
critique, a revised plan whose temporary drop spot turns out to be occupied
drawing a simulator rejection with a placement suggestion, and a final
three-leg swap that clears every gate.
"""

from __future__ import annotations

from dataclasses import dataclass

from .agents import AgentScript, ScriptedBackend
from .kinesim import ArmModel, default_model
from .model import ObjectObservation, Scene
from .orchestrator import (
    Ablation,
    ScriptedHuman,
    SessionConfig,
    SessionResult,
    run_session,
)
from .perceptor import DetectionErrorSpec, SyntheticSource


@dataclass(frozen=True)
class ScriptedScenario:
    name: str
    instruction: str
    scene: Scene
    planner_entries: tuple[dict, ...]
    analyzer_entries: tuple[dict, ...] = ()
    human_rounds: tuple[tuple[str, ...], ...] = ()
    ablation: frozenset[Ablation] = frozenset()
    max_iterations: int = 10
    detection_errors: DetectionErrorSpec | None = None

    def planner_script(self) -> AgentScript:
        return AgentScript.from_records(list(self.planner_entries))

    def analyzer_script(self) -> AgentScript:
        entries = list(self.analyzer_entries) or [{"response": {"verdict": "feasible"}}]
        return AgentScript.from_records(entries)


def run_scenario(
    scenario: ScriptedScenario,
    model: ArmModel | None = None,
    cfg: SessionConfig | None = None,
    clock=None,
    on_event=None,
) -> SessionResult:
    if model is None:
        model = default_model()
    if cfg is None:
        cfg = SessionConfig(
            max_iterations=scenario.max_iterations, ablation=scenario.ablation
        )
    source = SyntheticSource(
        ground_truth=scenario.scene, errors=scenario.detection_errors
    )
    kwargs = {}
    if clock is not None:
        kwargs["clock"] = clock
    return run_session(
        scenario.instruction,
        source,
        ScriptedBackend(scenario.planner_script()),
        ScriptedBackend(scenario.analyzer_script()),
        ScriptedHuman([list(r) for r in scenario.human_rounds]),
        model,
        cfg,
        on_event=on_event,
        **kwargs,
    )


def _instr(plan_steps: list[dict]) -> dict:
    return {"response": {"type": "instructions", "plan": plan_steps}}


def _grasp(oid: str) -> dict:
    return {"action": "grasp", "object": oid}


def _move(x: float, y: float, z: float) -> dict:
    return {"action": "move", "target": [x, y, z]}


_HOME = {"action": "home"}

# Scene shared by the interchange variants: the swap pair plus a cube parked
# exactly where the naive revision wants its temporary location.
_APPLE = ("apple_0", (0.40, -0.15, 0.037), (0.037, 0.037, 0.037))
_CAN = ("soup_can_0", (0.40, 0.15, 0.05), (0.033, 0.033, 0.05))
_CUBE = ("wooden_cube_0", (0.50, 0.0, 0.025), (0.025, 0.025, 0.025))


def _interchange_scene() -> Scene:
    return Scene(objects=(
        ObjectObservation(_APPLE[0], "apple", _APPLE[1], _APPLE[2]),
        ObjectObservation(_CAN[0], "soup_can", _CAN[1], _CAN[2]),
        ObjectObservation(_CUBE[0], "wooden_cube", _CUBE[1], _CUBE[2]),
    ))


_DIRECT_SWAP = [
    _grasp("apple_0"), _move(0.40, 0.15, 0.037),
    _grasp("soup_can_0"), _move(0.40, -0.15, 0.05),
    _HOME,
]
_TEMP_OCCUPIED = [
    _grasp("apple_0"), _move(0.50, 0.0, 0.037),
    _grasp("soup_can_0"), _move(0.40, -0.15, 0.05),
    _grasp("apple_0"), _move(0.40, 0.15, 0.037),
    _HOME,
]
_TEMP_FREE = [
    _grasp("apple_0"), _move(0.58, -0.25, 0.037),
    _grasp("soup_can_0"), _move(0.40, -0.15, 0.05),
    _grasp("apple_0"), _move(0.40, 0.15, 0.037),
    _HOME,
]

_SWAP_CRITIQUE = {
    "response": {
        "verdict": "revise",
        "reasons": [
            "moving apple_0 directly to soup_can_0's location will collide with "
            "soup_can_0, which is still there; move apple_0 to a free temporary "
            "location first, then move soup_can_0, then bring apple_0 back"
        ],
    }
}
_FEASIBLE = {"response": {"verdict": "feasible"}}

_INTERCHANGE_INSTRUCTION = (
    "Interchange the locations of two objects: apple_0 and soup_can_0."
)


def interchange_logic_scenario() -> ScriptedScenario:
    """Direct swap -> analyzer critique -> occupied temp spot -> simulator
    rejection -> feasible three-leg swap."""
    return ScriptedScenario(
        name="interchange",
        instruction=_INTERCHANGE_INSTRUCTION,
        scene=_interchange_scene(),
        planner_entries=(
            _instr(_DIRECT_SWAP),
            {**_instr(_TEMP_OCCUPIED), "guard_source": "analyzer"},
            {**_instr(_TEMP_FREE), "guard_source": "simulator"},
        ),
        analyzer_entries=(_SWAP_CRITIQUE, _FEASIBLE, _FEASIBLE),
    )


def interchange_without_simulator() -> ScriptedScenario:
    """Same exchange with the simulator gate disabled: converges one round
    earlier, onto the plan whose temporary placement is occupied."""
    return ScriptedScenario(
        name="interchange-no-simulator",
        instruction=_INTERCHANGE_INSTRUCTION,
        scene=_interchange_scene(),
        planner_entries=(
            _instr(_DIRECT_SWAP),
            {**_instr(_TEMP_OCCUPIED), "guard_source": "analyzer"},
        ),
        analyzer_entries=(_SWAP_CRITIQUE, _FEASIBLE),
        ablation=frozenset({Ablation.DISABLE_SIMULATOR}),
    )


def interchange_without_analyzer() -> ScriptedScenario:
    """Same exchange with the analyzer gate disabled: the direct swap reaches
    the simulator and fails there with a collision."""
    return ScriptedScenario(
        name="interchange-no-analyzer",
        instruction=_INTERCHANGE_INSTRUCTION,
        scene=_interchange_scene(),
        planner_entries=(
            _instr(_DIRECT_SWAP),
            {**_instr(_TEMP_FREE), "guard_source": "simulator"},
        ),
        ablation=frozenset({Ablation.DISABLE_ANALYZER}),
    )


_SIMPLE_SCENE_APPLE = Scene(objects=(
    ObjectObservation("apple_0", "apple", (0.40, -0.15, 0.037), (0.037, 0.037, 0.037)),
))

_GOOD_APPLE_PLAN = [_grasp("apple_0"), _move(0.55, -0.25, 0.037), _HOME]


def out_of_bounds_scenario() -> ScriptedScenario:
    """First plan targets a point outside the workspace; the bounds gate
    short-circuits (analyzer-sourced feedback), the revision converges."""
    return ScriptedScenario(
        name="out-of-bounds",
        instruction="Move the apple somewhere else on the table.",
        scene=_SIMPLE_SCENE_APPLE,
        planner_entries=(
            _instr([_grasp("apple_0"), _move(1.50, 0.0, 0.10), _HOME]),
            {
                **_instr(_GOOD_APPLE_PLAN),
                "guard_source": "analyzer",
                "guard_substring": "out of bounds",
            },
        ),
        analyzer_entries=(_FEASIBLE,),
    )


def human_question_scenario() -> ScriptedScenario:
    """The planner asks where to put the apple, the human answers, the revised
    plan converges."""
    return ScriptedScenario(
        name="human-question",
        instruction="Give me the apple.",
        scene=_SIMPLE_SCENE_APPLE,
        planner_entries=(
            {
                "response": {
                    "type": "question human",
                    "questions": ["Where should I place the apple?"],
                }
            },
            {**_instr(_GOOD_APPLE_PLAN), "guard_source": "human"},
        ),
        analyzer_entries=(_FEASIBLE,),
        human_rounds=(("Put it near the front-left corner, around [0.55, -0.25].",),),
    )


def exhaustion_scenario(max_iterations: int = 10) -> ScriptedScenario:
    """The planner re-submits the same plan every round and the analyzer
    rejects it every time; the loop stops at the iteration cap."""
    plan = _instr([_grasp("apple_0"), _move(0.60, 0.20, 0.037), _HOME])
    critique = {
        "response": {
            "verdict": "revise",
            "reasons": ["the plan does not accomplish the requested task"],
        }
    }
    return ScriptedScenario(
        name="exhaustion",
        instruction="Sort the table.",
        scene=_SIMPLE_SCENE_APPLE,
        planner_entries=tuple([plan] * max_iterations),
        analyzer_entries=tuple([critique] * max_iterations),
        max_iterations=max_iterations,
    )


def perception_retry_scenario() -> ScriptedScenario:
    """The requested object is invisible from the first viewpoint; the planner
    asks for a re-scan, the object appears, and the plan converges."""
    scene = Scene(objects=(
        ObjectObservation("apple_0", "apple", (0.40, -0.15, 0.037), (0.037,) * 3),
        ObjectObservation("soup_can_0", "soup_can", (0.45, 0.20, 0.05),
                          (0.033, 0.033, 0.05)),
    ))
    return ScriptedScenario(
        name="perception-retry",
        instruction="Give me the apple.",
        scene=scene,
        planner_entries=(
            {
                "response": {
                    "type": "perception feedback",
                    "reason": "the task names an apple but none is detected",
                }
            },
            {**_instr(_GOOD_APPLE_PLAN), "guard_source": "perception"},
        ),
        analyzer_entries=(_FEASIBLE,),
        detection_errors=DetectionErrorSpec(
            hidden_ids=frozenset({"apple_0"}), reveal_at_viewpoint=1
        ),
    )


SCENARIOS = {
    "interchange": interchange_logic_scenario,
    "interchange-no-simulator": interchange_without_simulator,
    "interchange-no-analyzer": interchange_without_analyzer,
    "out-of-bounds": out_of_bounds_scenario,
    "human-question": human_question_scenario,
    "exhaustion": exhaustion_scenario,
    "perception-retry": perception_retry_scenario,
}


def get_scenario(name: str) -> ScriptedScenario:
    try:
        factory = SCENARIOS[name]
    except KeyError:
        raise KeyError(
            f"unknown scenario {name!r}; available: {', '.join(sorted(SCENARIOS))}"
        ) from None
    return factory()
