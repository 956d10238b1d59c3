"""Mechanized per-task success tests over (initial scene, final scene,
transcript)."""

from __future__ import annotations

import itertools
import math

import numpy as np

from ..errors import UnknownTask
from ..model import Scene, TranscriptEvent
from .oracle import _ANSWER_RE, _T1_RE, _T6_RE, _T7_RE
from .tasks import EDIBLE_LABELS

DEFAULT_TOLERANCE = 0.005
SQUARE_SIDE_TOL = 0.01
SQUARE_DIAG_TOL = 0.015
LINE_RESIDUAL_TOL = 0.01


def _xy(obj) -> np.ndarray:
    return np.array(obj.center[:2])


def _instruction_from(transcript) -> str:
    for e in transcript:
        if e.kind == "status" and "instruction" in e.body:
            return e.body["instruction"]
    return ""


def _workspace_from(transcript) -> tuple[tuple[float, ...], tuple[float, ...]]:
    for e in transcript:
        if e.kind == "status" and "workspace" in e.body:
            w = e.body["workspace"]
            return tuple(w["min"]), tuple(w["max"])
    return (0.25, -0.35, 0.0), (0.70, 0.35, 0.50)


def _answered_location(transcript) -> tuple[float, float] | None:
    found = None
    for e in transcript:
        if e.kind == "answer":
            for text in e.body.get("answers", []):
                matches = _ANSWER_RE.findall(text)
                if matches:
                    found = (float(matches[-1][0]), float(matches[-1][1]))
    return found


def _delivered(label: str, final_scene: Scene, transcript, tolerance: float) -> bool:
    spot = _answered_location(transcript)
    if spot is None:
        return False
    return any(
        o.label == label
        and math.dist(o.center[:2], spot) <= tolerance
        for o in final_scene.objects
    )


def _mirrored(initial: Scene, final: Scene, transcript, tolerance: float) -> bool:
    lo, hi = _workspace_from(transcript)
    mid = ((lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2)
    for axis in (0, 1):
        ok = True
        for o in initial.objects:
            f = final.get(o.id)
            if f is None:
                ok = False
                break
            want = list(o.center[:2])
            want[axis] = 2 * mid[axis] - want[axis]
            if math.dist(f.center[:2], want) > tolerance:
                ok = False
                break
        if ok:
            return True
    return False


def _quadrant(xy, mid, tolerance: float) -> tuple[int, int] | None:
    dx, dy = xy[0] - mid[0], xy[1] - mid[1]
    if abs(dx) <= tolerance or abs(dy) <= tolerance:
        return None  # sitting on a midline is not inside any quadrant
    return (1 if dx > 0 else -1, 1 if dy > 0 else -1)


def _quadrants(final: Scene, transcript, tolerance: float) -> bool:
    lo, hi = _workspace_from(transcript)
    mid = ((lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2)
    by_label: dict[str, set] = {}
    for o in final.objects:
        q = _quadrant(o.center[:2], mid, tolerance)
        if q is None:
            return False
        by_label.setdefault(o.label, set()).add(q)
    if any(len(qs) != 1 for qs in by_label.values()):
        return False
    occupied = [next(iter(qs)) for qs in by_label.values()]
    return len(occupied) == len(set(occupied))


def _is_square(points: np.ndarray) -> bool:
    dists = sorted(
        float(np.linalg.norm(points[i] - points[j]))
        for i, j in itertools.combinations(range(4), 2)
    )
    sides, diagonals = dists[:4], dists[4:]
    if sides[0] < 1e-6:
        return False
    if sides[3] - sides[0] > SQUARE_SIDE_TOL:
        return False
    if diagonals[1] - diagonals[0] > SQUARE_DIAG_TOL:
        return False
    return diagonals[0] > sides[3]  # genuinely a quadrilateral, not a rhombus


def _square(final: Scene) -> bool:
    objs = list(final.objects)
    if len(objs) < 4:
        return False
    for combo in itertools.combinations(objs, 4):
        if _is_square(np.array([_xy(o) for o in combo])):
            return True
    return False


def _interchanged(pairs, initial: Scene, final: Scene, tolerance: float) -> bool:
    for a, b in pairs:
        ia, ib = initial.get(a), initial.get(b)
        fa, fb = final.get(a), final.get(b)
        if None in (ia, ib, fa, fb):
            return False
        if math.dist(fa.center[:2], ib.center[:2]) > tolerance:
            return False
        if math.dist(fb.center[:2], ia.center[:2]) > tolerance:
            return False
    return True


def _line(final: Scene) -> bool:
    pts = np.array([_xy(o) for o in final.objects])
    if len(pts) < 2:
        return True
    centered = pts - pts.mean(axis=0)
    # largest-variance direction; residuals are distances to that line
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    direction = vt[0]
    normal = np.array([-direction[1], direction[0]])
    residual = float(np.max(np.abs(centered @ normal)))
    return residual <= LINE_RESIDUAL_TOL


def goal_predicate(
    task_id: str,
    initial_scene: Scene,
    final_scene: Scene,
    transcript: tuple[TranscriptEvent, ...],
    tolerance: float = DEFAULT_TOLERANCE,
) -> bool:
    """Did the final scene satisfy the task's goal?"""
    instruction = _instruction_from(transcript)
    if task_id == "T1":
        m = _T1_RE.match(instruction)
        if not m:
            return False
        return _delivered(m.group(1), final_scene, transcript, tolerance)
    if task_id == "T2":
        return any(
            _delivered(label, final_scene, transcript, tolerance)
            for label in EDIBLE_LABELS
        )
    if task_id == "T3":
        return _mirrored(initial_scene, final_scene, transcript, tolerance)
    if task_id == "T4":
        return _quadrants(final_scene, transcript, tolerance)
    if task_id == "T5":
        return _square(final_scene)
    if task_id == "T6":
        m = _T6_RE.match(instruction)
        if not m:
            return False
        return _interchanged([(m.group(1), m.group(2))], initial_scene,
                             final_scene, tolerance)
    if task_id == "T7":
        m = _T7_RE.match(instruction)
        if not m:
            return False
        pairs = [(m.group(1), m.group(2)), (m.group(3), m.group(4))]
        return _interchanged(pairs, initial_scene, final_scene, tolerance)
    if task_id == "T8":
        return _line(final_scene)
    raise UnknownTask(f"no goal predicate for task {task_id!r}")
