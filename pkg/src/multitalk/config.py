"""Session config documents: one dict (JSON or YAML file) that names the
instruction, the scene source, the agent backends, and the loop settings.

Used by both the CLI and the HTTP service. The "scenario" backend kind swaps
in a packaged scripted scenario (scene, scripts, and canned answers included),
with any explicitly-set loop fields still applying on top.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .agents import AgentScript, LiveBackend, ScriptedBackend
from .bench.oracle import ApproveAllAnalyzer, BenchHuman, DirectSwapPlanner, OraclePlanner
from .errors import ConfigError
from .geometry import DEFAULT_WORKSPACE, WorkspaceRegion
from .kinesim import ArmModel, SimConfig, default_model, load_model
from .orchestrator import Ablation, ScriptedHuman, SessionConfig
from .perceptor import (
    DetectionErrorSpec,
    SyntheticSource,
    generate_environment_config,
    load_scene_file,
)

DEFAULT_CREDENTIAL_ENV = "MULTITALK_LLM_KEY"


@dataclass(frozen=True, eq=False)
class SessionSpec:
    """Everything run_session needs, resolved from a config document."""

    instruction: str
    source: SyntheticSource
    planner_backend: Any
    analyzer_backend: Any
    human: Any  # may be None: the runner chooses (terminal or queue)
    model: ArmModel
    session_config: SessionConfig
    doc: dict


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    if path.suffix in (".yaml", ".yml"):
        import yaml

        doc = yaml.safe_load(text)
    else:
        doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return doc


def _build_scene_source(doc: dict, seed: int | None) -> SyntheticSource:
    scene_doc = doc.get("scene")
    if not isinstance(scene_doc, dict) or not scene_doc:
        raise ConfigError("config needs a 'scene' block (file, inline, or generator)")
    if "file" in scene_doc:
        return load_scene_file(scene_doc["file"])
    if "inline" in scene_doc:
        from .model import scene_from_dict

        scene = scene_from_dict(scene_doc["inline"])
        errors = None
        if "errors" in scene_doc["inline"]:
            errors = DetectionErrorSpec.from_dict(scene_doc["inline"]["errors"])
        return SyntheticSource(ground_truth=scene, errors=errors)
    if "generator" in scene_doc:
        gen = scene_doc["generator"]
        from .bench.tasks import OBJECT_CATALOG

        scene = generate_environment_config(
            gen.get("task", ""),
            gen.get("catalog", OBJECT_CATALOG),
            int(gen.get("n_objects", 3)),
            seed=int(gen.get("seed", seed if seed is not None else 0)),
            require_labels=tuple(gen.get("require_labels", ())),
        )
        errors = None
        if "errors" in gen:
            errors = DetectionErrorSpec.from_dict(gen["errors"])
        return SyntheticSource(ground_truth=scene, errors=errors)
    raise ConfigError("scene block needs one of: file, inline, generator")


def _build_backends(doc: dict, base_dir: Path):
    backend = doc.get("backend", {"kind": "oracle"})
    kind = backend.get("kind", "oracle")
    if kind == "oracle":
        return OraclePlanner(), ApproveAllAnalyzer()
    if kind == "direct-swap":
        return DirectSwapPlanner(), ApproveAllAnalyzer()
    if kind == "scripted":
        planner_path = backend.get("planner_script")
        if not planner_path:
            raise ConfigError("scripted backend needs 'planner_script'")
        planner = ScriptedBackend(AgentScript.from_file(base_dir / planner_path))
        analyzer_path = backend.get("analyzer_script")
        analyzer = (
            ScriptedBackend(AgentScript.from_file(base_dir / analyzer_path))
            if analyzer_path
            else ApproveAllAnalyzer()
        )
        return planner, analyzer
    if kind == "live":
        env_name = backend.get("credential_env", DEFAULT_CREDENTIAL_ENV)
        credential = os.environ.get(env_name, "")
        if not credential:
            raise ConfigError(
                f"live backend requires the {env_name} environment variable"
            )
        live = LiveBackend(
            backend.get("endpoint", "https://api.openai.com/v1"),
            backend.get("model", "gpt-4o"),
            credential,
            timeout=float(backend.get("timeout", 60.0)),
        )
        return live, live
    raise ConfigError(f"unknown backend kind {kind!r}")


def _build_human(doc: dict):
    human = doc.get("human")
    if human is None:
        return None
    kind = human.get("kind")
    if kind == "scripted":
        return ScriptedHuman([list(r) for r in human.get("rounds", [])])
    if kind == "auto":
        return "auto"  # resolved after the scene exists
    if kind == "queue":
        return None
    raise ConfigError(f"unknown human channel kind {kind!r}")


def build_session_spec(
    doc: dict,
    base_dir: str | Path = ".",
    seed: int | None = None,
) -> SessionSpec:
    """Resolve a config document into live session parts.

    base_dir anchors relative script/scene/model paths (the config file's own
    directory, usually).
    """
    base_dir = Path(base_dir)
    doc = dict(doc)

    backend = doc.get("backend", {})
    if backend.get("kind") == "scenario":
        from .scenarios import get_scenario

        scenario = get_scenario(backend.get("scenario", "interchange"))
        doc.setdefault("instruction", scenario.instruction)
        doc.setdefault("max_iterations", scenario.max_iterations)
        doc.setdefault(
            "ablation", sorted(a.value for a in scenario.ablation)
        )
        source = SyntheticSource(
            ground_truth=scenario.scene, errors=scenario.detection_errors
        )
        planner = ScriptedBackend(scenario.planner_script())
        analyzer = ScriptedBackend(scenario.analyzer_script())
        if doc.get("human", {}).get("kind") == "queue":
            human = None  # remote answers via the service bridge
        else:
            human = ScriptedHuman([list(r) for r in scenario.human_rounds])
    else:
        instruction = doc.get("instruction", "")
        if not instruction:
            raise ConfigError("instruction required")
        source = _build_scene_source(doc, seed)
        planner, analyzer = _build_backends(doc, base_dir)
        human = _build_human(doc)
        if human == "auto":
            human = BenchHuman(instruction, source.snapshot())

    instruction = doc.get("instruction", "")
    if not instruction:
        raise ConfigError("instruction required")

    model_file = doc.get("model_file")
    if model_file:
        model = load_model(base_dir / model_file)
    else:
        model = default_model()

    workspace = (
        WorkspaceRegion.from_dict(doc["workspace"])
        if "workspace" in doc
        else DEFAULT_WORKSPACE
    )
    sim = SimConfig.from_dict(doc.get("sim", {}))
    try:
        ablation = frozenset(Ablation(a) for a in doc.get("ablation", []))
    except ValueError as exc:
        raise ConfigError(f"bad ablation value: {exc}") from exc

    cfg = SessionConfig(
        max_iterations=int(doc.get("max_iterations", 10)),
        workspace=workspace,
        sim=sim,
        ablation=ablation,
        history_cap=int(doc.get("history_cap", 40)),
        human_timeout=doc.get("human_timeout"),
    )
    return SessionSpec(
        instruction=instruction,
        source=source,
        planner_backend=planner,
        analyzer_backend=analyzer,
        human=human,
        model=model,
        session_config=cfg,
        doc=doc,
    )
