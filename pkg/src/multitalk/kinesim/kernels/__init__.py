"""Kernel backend selection: compiled extension when available, numpy fallback
otherwise. Set MULTITALK_PURE_PYTHON=1 to force the fallback."""

from __future__ import annotations

import os

from . import _reference

REACHED = _reference.REACHED
STALLED = _reference.STALLED
BUDGET_EXHAUSTED = _reference.BUDGET_EXHAUSTED


def _load_native():
    from multitalk.kinesim import _native  # noqa: PLC0415

    return _native


if os.environ.get("MULTITALK_PURE_PYTHON", "") not in ("", "0"):
    _impl = _reference
    BACKEND = "reference"
else:
    try:
        _impl = _load_native()
        BACKEND = "native"
    except ImportError:
        _impl = _reference
        BACKEND = "reference"

fk_pose = _impl.fk_pose
jacobian = _impl.jacobian
track_segment = _impl.track_segment


def available_backends() -> dict[str, object]:
    """Importable kernel modules keyed by name; used by the kernel benchmark
    and the backend-parity tests."""
    backends: dict[str, object] = {"reference": _reference}
    try:
        backends["native"] = _load_native()
    except ImportError:
        pass
    return backends
