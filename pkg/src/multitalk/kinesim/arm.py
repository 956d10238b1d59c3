"""7-DoF arm model and simulator configuration.

Model files are plain text, one record per line, in this exact order:

    dh <a> <d> <alpha> <theta_offset>   # 7 rows, base to wrist, standard DH
    flange <a> <d> <alpha> <theta>      # 1 row, fixed tool transform
    limit <lo> <hi>                     # 7 rows, same joint order
    max_joint_speed <rad_per_s>         # 1 row
    home <q1> ... <q7>                  # 1 row

Lengths in meters, angles in radians; '#' starts a comment. The packaged
default is an FR3-like arm: published FR3 joint limits with link offsets
stretched a few centimeters so the whole default workspace stays comfortably
inside the dexterous envelope.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import ConfigError

DEFAULT_MODEL_NAME = "fr3_like.model"


@dataclass(frozen=True, eq=False)
class ArmModel:
    dh: np.ndarray  # (7, 4) rows of (a, d, alpha, theta_offset)
    flange: np.ndarray  # (4,) one fixed (a, d, alpha, theta) row
    joint_limits: np.ndarray  # (7, 2) of (lo, hi)
    max_joint_speed: float
    home_config: np.ndarray  # (7,)

    def __post_init__(self):
        dh = np.ascontiguousarray(self.dh, dtype=float)
        flange = np.ascontiguousarray(self.flange, dtype=float)
        limits = np.ascontiguousarray(self.joint_limits, dtype=float)
        home = np.ascontiguousarray(self.home_config, dtype=float)
        if dh.shape != (7, 4):
            raise ConfigError(f"expected 7 dh rows of 4 values, got shape {dh.shape}")
        if flange.shape != (4,):
            raise ConfigError("expected one flange row of 4 values")
        if limits.shape != (7, 2):
            raise ConfigError("expected 7 limit rows of (lo, hi)")
        if np.any(limits[:, 0] >= limits[:, 1]):
            raise ConfigError("each joint limit must satisfy lo < hi")
        if home.shape != (7,):
            raise ConfigError("home config must have 7 joint values")
        if np.any(home < limits[:, 0]) or np.any(home > limits[:, 1]):
            raise ConfigError("home config must lie within the joint limits")
        if self.max_joint_speed <= 0:
            raise ConfigError("max_joint_speed must be positive")
        for arr in (dh, flange, limits, home):
            arr.setflags(write=False)
        object.__setattr__(self, "dh", dh)
        object.__setattr__(self, "flange", flange)
        object.__setattr__(self, "joint_limits", limits)
        object.__setattr__(self, "home_config", home)

    @property
    def n_joints(self) -> int:
        return 7


def parse_model(text: str, origin: str = "<string>") -> ArmModel:
    dh_rows: list[list[float]] = []
    flange: list[float] | None = None
    limits: list[list[float]] = []
    speed: float | None = None
    home: list[float] | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *rest = line.split()
        try:
            values = [float(v) for v in rest]
        except ValueError as exc:
            raise ConfigError(f"{origin}:{lineno}: non-numeric value in '{line}'") from exc
        if tag == "dh":
            if len(values) != 4:
                raise ConfigError(f"{origin}:{lineno}: dh row needs 4 values")
            dh_rows.append(values)
        elif tag == "flange":
            if len(values) != 4:
                raise ConfigError(f"{origin}:{lineno}: flange row needs 4 values")
            flange = values
        elif tag == "limit":
            if len(values) != 2:
                raise ConfigError(f"{origin}:{lineno}: limit row needs 2 values")
            limits.append(values)
        elif tag == "max_joint_speed":
            if len(values) != 1:
                raise ConfigError(f"{origin}:{lineno}: max_joint_speed needs 1 value")
            speed = values[0]
        elif tag == "home":
            if len(values) != 7:
                raise ConfigError(f"{origin}:{lineno}: home row needs 7 values")
            home = values
        else:
            raise ConfigError(f"{origin}:{lineno}: unknown record '{tag}'")

    if len(dh_rows) != 7:
        raise ConfigError(f"{origin}: expected 7 dh rows, found {len(dh_rows)}")
    if flange is None:
        raise ConfigError(f"{origin}: missing flange row")
    if len(limits) != 7:
        raise ConfigError(f"{origin}: expected 7 limit rows, found {len(limits)}")
    if speed is None:
        raise ConfigError(f"{origin}: missing max_joint_speed")
    if home is None:
        raise ConfigError(f"{origin}: missing home row")

    return ArmModel(
        dh=np.array(dh_rows),
        flange=np.array(flange),
        joint_limits=np.array(limits),
        max_joint_speed=speed,
        home_config=np.array(home),
    )


def load_model(path: str | Path) -> ArmModel:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"model file not found: {path}")
    return parse_model(path.read_text(), origin=str(path))


def default_model() -> ArmModel:
    text = resources.files("multitalk.data").joinpath(DEFAULT_MODEL_NAME).read_text()
    return parse_model(text, origin=DEFAULT_MODEL_NAME)


@dataclass(frozen=True)
class SimConfig:
    """Feasibility-checker tuning. All values positive; defaults are sized for
    the default tabletop workspace."""

    condition_number_threshold: float = 80.0
    placement_tolerance: float = 0.005
    trajectory_sample_spacing: float = 0.01
    ik_gain: float = 0.5
    ik_max_iterations: int = 1200
    gripper_box_half_extents: tuple[float, float, float] = (0.04, 0.04, 0.06)
    grasp_clearance: float = 0.02
    # tool height while traveling: the tallest catalog object carried over the
    # tallest standing one clears by 2 cm
    transit_height: float = 0.40

    def __post_init__(self):
        object.__setattr__(
            self, "gripper_box_half_extents", tuple(self.gripper_box_half_extents)
        )
        scalars = {
            "condition_number_threshold": self.condition_number_threshold,
            "placement_tolerance": self.placement_tolerance,
            "trajectory_sample_spacing": self.trajectory_sample_spacing,
            "ik_gain": self.ik_gain,
            "ik_max_iterations": self.ik_max_iterations,
            "grasp_clearance": self.grasp_clearance,
            "transit_height": self.transit_height,
        }
        for name, value in scalars.items():
            if value <= 0:
                raise ConfigError(f"SimConfig.{name} must be positive")
        if any(h <= 0 for h in self.gripper_box_half_extents):
            raise ConfigError("SimConfig.gripper_box_half_extents must be positive")

    def to_dict(self) -> dict:
        return {
            "condition_number_threshold": self.condition_number_threshold,
            "placement_tolerance": self.placement_tolerance,
            "trajectory_sample_spacing": self.trajectory_sample_spacing,
            "ik_gain": self.ik_gain,
            "ik_max_iterations": self.ik_max_iterations,
            "gripper_box_half_extents": list(self.gripper_box_half_extents),
            "grasp_clearance": self.grasp_clearance,
            "transit_height": self.transit_height,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SimConfig":
        known = dict(doc)
        if "gripper_box_half_extents" in known:
            known["gripper_box_half_extents"] = tuple(known["gripper_box_half_extents"])
        field_names = set(cls.__dataclass_fields__)
        unknown = set(known) - field_names
        if unknown:
            raise ConfigError(f"unknown sim config fields: {sorted(unknown)}")
        return cls(**known)
