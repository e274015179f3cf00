"""Limb kinematics and rotation handling for a 3-DOF coxa-femur-tibia leg.

Frames and conventions (fixed once, used everywhere):

* Limb frame: origin at the first (coxa) joint, x pointing outward along
  the limb's mounting direction, z up. At the zero pose all three segments
  are collinear along +x.
* Joint angles: coxa is a yaw about the limb z axis; femur and tibia are
  pitches in the vertical plane after the yaw, positive raising the toe.
* IK branch: tibia angle of fixed non-positive sign, i.e. the knee-raised
  configuration (femur up, tibia folded back down; the knee sits above
  the hip-to-toe chord). This is the bracing stance the platform
  actually uses; the mirrored branch runs the femur into its travel
  limit for wall-gap geometries.
* Body orientation: theta_b = [roll, pitch, yaw]; the exact rotation is
  the intrinsic ZYX composition Rz(yaw) @ Ry(pitch) @ Rx(roll), which
  agrees with the linearized form I + skew(theta_b) to first order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnreachableTargetError

DEFAULT_JOINT_LIMIT = np.pi / 2


@dataclass(frozen=True)
class LimbGeometry:
    """Segment lengths plus where/how the limb mounts on the torso.

    ``mount_offset`` is the vector from the body COM to the coxa joint in
    the body frame; ``mount_yaw`` is the limb-frame heading in the body
    frame. Default segment lengths are coxa 57 mm, femur 195 mm,
    tibia 375 mm.
    """

    coxa_length: float = 0.057
    femur_length: float = 0.195
    tibia_length: float = 0.375
    mount_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    mount_yaw: float = 0.0

    def __post_init__(self):
        if min(self.coxa_length, self.femur_length, self.tibia_length) <= 0.0:
            raise ValueError("segment lengths must be strictly positive")
        object.__setattr__(self, "mount_offset", np.asarray(self.mount_offset, dtype=float))

    @property
    def total_length(self) -> float:
        return self.coxa_length + self.femur_length + self.tibia_length


@dataclass(frozen=True)
class JointAngles:
    """Per-limb joint state (radians)."""

    coxa: float
    femur: float
    tibia: float

    def as_array(self) -> np.ndarray:
        return np.array([self.coxa, self.femur, self.tibia])


@dataclass(frozen=True)
class JointLimits:
    """Symmetric-by-default box limits on the three joints (radians)."""

    lower: np.ndarray = field(
        default_factory=lambda: np.full(3, -DEFAULT_JOINT_LIMIT)
    )
    upper: np.ndarray = field(
        default_factory=lambda: np.full(3, DEFAULT_JOINT_LIMIT)
    )

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        if np.any(self.upper < self.lower):
            raise ValueError("upper joint limits must be >= lower limits")

    def contains(self, q: JointAngles, tol: float = 1e-9) -> bool:
        a = q.as_array()
        return bool(np.all(a >= self.lower - tol) and np.all(a <= self.upper + tol))


DEFAULT_LIMITS = JointLimits()


@dataclass(frozen=True)
class BodyPose:
    """World-frame body COM position and orientation angles [roll, pitch, yaw]."""

    p_com: np.ndarray
    theta_b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_com", np.asarray(self.p_com, dtype=float))
        object.__setattr__(self, "theta_b", np.asarray(self.theta_b, dtype=float))


def skew(v) -> np.ndarray:
    """Cross-product matrix: skew(v) @ u == np.cross(v, u)."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rotation_x(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_y(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_z(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_linearized(theta_b) -> np.ndarray:
    """First-order rotation I + skew(theta_b) used inside the posture MICP."""
    return np.eye(3) + skew(theta_b)


def rotation_exact(theta_b) -> np.ndarray:
    """Exact body rotation, intrinsic ZYX: Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    roll, pitch, yaw = np.asarray(theta_b, dtype=float)
    return rotation_z(yaw) @ rotation_y(pitch) @ rotation_x(roll)


def forward_kinematics(geom: LimbGeometry, q: JointAngles) -> np.ndarray:
    """Toe position in the limb frame. Total function on valid angles."""
    c, f, t = geom.coxa_length, geom.femur_length, geom.tibia_length
    radial = c + f * np.cos(q.femur) + t * np.cos(q.femur + q.tibia)
    height = f * np.sin(q.femur) + t * np.sin(q.femur + q.tibia)
    return np.array(
        [radial * np.cos(q.coxa), radial * np.sin(q.coxa), height]
    )


def limb_jacobian(geom: LimbGeometry, q: JointAngles) -> np.ndarray:
    """Analytic 3x3 Jacobian d(toe)/d(q) of forward_kinematics."""
    c, f, t = geom.coxa_length, geom.femur_length, geom.tibia_length
    c1, s1 = np.cos(q.coxa), np.sin(q.coxa)
    c2, s2 = np.cos(q.femur), np.sin(q.femur)
    c23, s23 = np.cos(q.femur + q.tibia), np.sin(q.femur + q.tibia)
    radial = c + f * c2 + t * c23
    dr_dq2 = -f * s2 - t * s23
    dr_dq3 = -t * s23
    dz_dq2 = f * c2 + t * c23
    dz_dq3 = t * c23
    return np.array(
        [
            [-radial * s1, dr_dq2 * c1, dr_dq3 * c1],
            [radial * c1, dr_dq2 * s1, dr_dq3 * s1],
            [0.0, dz_dq2, dz_dq3],
        ]
    )


def inverse_kinematics(
    geom: LimbGeometry,
    toe,
    limits: JointLimits = DEFAULT_LIMITS,
) -> JointAngles:
    """Joint angles reaching ``toe`` (limb frame), knee-down branch.

    Raises UnreachableTargetError when the planar target leaves the
    femur+tibia annulus (reporting how far outside it lies) or when the
    branch solution violates the joint limits.
    """
    x, y, z = np.asarray(toe, dtype=float)
    f, t = geom.femur_length, geom.tibia_length
    q1 = np.arctan2(y, x)
    r = np.hypot(x, y) - geom.coxa_length
    d = np.hypot(r, z)

    d_max = f + t
    d_min = abs(f - t)
    if d > d_max or d < d_min:
        gap = d - d_max if d > d_max else d_min - d
        raise UnreachableTargetError(
            f"toe {np.round((x, y, z), 4).tolist()} outside reachable annulus "
            f"by {gap:.4g} m",
            closest_distance=gap,
        )

    cos_q3 = (d * d - f * f - t * t) / (2.0 * f * t)
    q3 = np.arccos(np.clip(cos_q3, -1.0, 1.0))  # knee-down: q3 in [0, pi]
    q2 = np.arctan2(z, r) - np.arctan2(t * np.sin(q3), f + t * np.cos(q3))

    result = JointAngles(float(q1), float(q2), float(q3))
    if not limits.contains(result):
        raise UnreachableTargetError(
            f"IK solution {np.round(result.as_array(), 4).tolist()} violates "
            f"joint limits [{limits.lower.tolist()}, {limits.upper.tolist()}]"
        )
    return result


def workspace_radius(geom: LimbGeometry, margin: float = 0.15) -> float:
    """Radius of the ball approximating the limb workspace around the mount."""
    if not 0.0 <= margin < 1.0:
        raise ValueError(f"margin must be in [0, 1), got {margin}")
    return (1.0 - margin) * geom.total_length


# ---------------------------------------------------------------------------
# World-frame helpers: compose the body pose with the limb mounting.

def mount_position(geom: LimbGeometry, pose: BodyPose) -> np.ndarray:
    """World position of the limb's first joint."""
    return pose.p_com + rotation_exact(pose.theta_b) @ geom.mount_offset


def world_to_limb(geom: LimbGeometry, pose: BodyPose, p_world) -> np.ndarray:
    """Express a world point in the limb frame."""
    body = rotation_exact(pose.theta_b)
    in_body = body.T @ (np.asarray(p_world, dtype=float) - pose.p_com)
    return rotation_z(-geom.mount_yaw) @ (in_body - geom.mount_offset)


def limb_to_world(geom: LimbGeometry, pose: BodyPose, p_limb) -> np.ndarray:
    """Express a limb-frame point in the world frame."""
    body = rotation_exact(pose.theta_b)
    return pose.p_com + body @ (
        geom.mount_offset + rotation_z(geom.mount_yaw) @ np.asarray(p_limb, dtype=float)
    )


def forward_kinematics_world(geom: LimbGeometry, pose: BodyPose, q: JointAngles) -> np.ndarray:
    return limb_to_world(geom, pose, forward_kinematics(geom, q))


def inverse_kinematics_world(
    geom: LimbGeometry,
    pose: BodyPose,
    toe_world,
    limits: JointLimits = DEFAULT_LIMITS,
) -> JointAngles:
    return inverse_kinematics(geom, world_to_limb(geom, pose, toe_world), limits)


def world_jacobian(geom: LimbGeometry, pose: BodyPose, q: JointAngles) -> np.ndarray:
    """Jacobian mapping joint rates to world-frame toe velocity."""
    return (
        rotation_exact(pose.theta_b)
        @ rotation_z(geom.mount_yaw)
        @ limb_jacobian(geom, q)
    )
