"""Dialogue-driven robot task planning: a planner/analyzer agent loop grounded
by workspace bounds, a kinematic feasibility simulator, scene re-scans, and
human clarification."""

__version__ = "0.1.0"
