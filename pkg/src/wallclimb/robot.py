"""Robot configuration: six mounted limbs plus actuation parameters.

The default platform is a hexagonal torso with limbs RF, RM, RB on the
right side (mount yaw +60, 0, -60 degrees) and LF, LM, LB mirrored on
the left, all on a circumradius-0.15 m hexagon. Segment lengths, mass,
and the 26 N*m torque limit follow the driving platform's data sheet
defaults in kinematics/compliance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .compliance import ServoStiffness
from .kinematics import JointLimits, LimbGeometry, workspace_radius

LIMB_NAMES = ("RF", "RM", "RB", "LF", "LM", "LB")
# azimuth of each mount on the hexagon; front is +y, right wall is +x
LIMB_AZIMUTHS_DEG = (60.0, 0.0, -60.0, 120.0, 180.0, 240.0)
DEFAULT_CIRCUMRADIUS = 0.15
DEFAULT_TAU_MAX = 26.0  # N*m


def hexagon_limbs(
    circumradius: float = DEFAULT_CIRCUMRADIUS,
    coxa: float = 0.057,
    femur: float = 0.195,
    tibia: float = 0.375,
) -> tuple:
    """Six limb geometries on a regular hexagon, yaw pointing outward."""
    limbs = []
    for az_deg in LIMB_AZIMUTHS_DEG:
        az = np.deg2rad(az_deg)
        limbs.append(
            LimbGeometry(
                coxa_length=coxa,
                femur_length=femur,
                tibia_length=tibia,
                mount_offset=circumradius * np.array([np.cos(az), np.sin(az), 0.0]),
                mount_yaw=az,
            )
        )
    return tuple(limbs)


@dataclass(frozen=True)
class RobotModel:
    """Everything the planners need to know about the platform."""

    limbs: tuple = field(default_factory=hexagon_limbs)
    limb_names: tuple = LIMB_NAMES
    servo_stiffness: ServoStiffness = field(default_factory=ServoStiffness)
    joint_limits: JointLimits = field(default_factory=JointLimits)
    tau_max: float = DEFAULT_TAU_MAX
    mass: float = 10.3
    workspace_margin: float = 0.15

    def __post_init__(self):
        if len(self.limbs) != len(self.limb_names):
            raise ValueError("limb list and name list must have equal length")

    @property
    def num_limbs(self) -> int:
        return len(self.limbs)

    def reach_radius(self, limb_index: int) -> float:
        return workspace_radius(self.limbs[limb_index], self.workspace_margin)

    def limb_side(self, limb_index: int) -> str:
        """'right' for mounts with positive x, 'left' otherwise."""
        return "right" if self.limbs[limb_index].mount_offset[0] > 0 else "left"
