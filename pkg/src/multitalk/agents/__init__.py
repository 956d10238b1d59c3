"""Planner and analyzer agents: prompts, parsing, and backends."""

from .backends import (
    AgentBackend,
    AgentScript,
    CallableBackend,
    LiveBackend,
    Message,
    ScriptedBackend,
    ScriptEntry,
    extract_feedback_source,
)
from .calls import analyzer_call, planner_call
from .parsing import (
    APPROVAL_TOKEN,
    AnalyzerVerdict,
    Critique,
    Feasible,
    ResponseFormatError,
    parse_analyzer_response,
    parse_planner_response,
)
from .prompts import build_analyzer_prompt, build_planner_prompt

__all__ = [
    "AgentBackend",
    "AgentScript",
    "CallableBackend",
    "LiveBackend",
    "Message",
    "ScriptedBackend",
    "ScriptEntry",
    "extract_feedback_source",
    "analyzer_call",
    "planner_call",
    "APPROVAL_TOKEN",
    "AnalyzerVerdict",
    "Critique",
    "Feasible",
    "ResponseFormatError",
    "parse_analyzer_response",
    "parse_planner_response",
    "build_analyzer_prompt",
    "build_planner_prompt",
]
