"""Scenario definitions: wall geometry, robot config, and file I/O.

Built-in generators reproduce the three investigated wall profiles:
parallel walls with a step on each side, parallel walls with an
obstacle forcing laterally offset mid-height regions, and non-parallel
walls at a horizontal opening angle. Scenario files are YAML with a
``format_version`` and an explicit length unit ("m" or "mm", converted
to SI on load); the saver always writes canonical meters, so canonical
files round-trip bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import yaml

from .compliance import ExternalLoad, ServoStiffness
from .errors import (
    InfeasibleInstantError,
    InstantKinematicsError,
    MalformedScenarioError,
)
from .force import DEFAULT_S_MU_FLOOR, calibrate_push_weight, gait_instants
from .kinematics import JointLimits, LimbGeometry
from .posture import PlannerWeights, Posture, Region, RegionSet
from .robot import LIMB_NAMES, RobotModel, hexagon_limbs

WALL_GAP = 1.230  # m, wall-to-wall distance at the torso
STEP_DEPTH = 0.040
STEP_HEIGHT = 0.200
# stance geometry shared by the built-in scenarios: see the planner's
# stance band; toes ride 0.22-0.27 m below the COM plane
STANCE_BAND = (-0.27, -0.22)
STANCE_DROP = 0.245
BUILTIN_WORKSPACE_MARGIN = 0.03


@dataclass(frozen=True)
class WallScenario:
    """Complete scenario: geometry, robot, weights, and solver knobs."""

    name: str
    mass: float
    g: float
    mu: float
    alpha: float  # horizontal angle between the walls [rad]; 0 = parallel
    regions: RegionSet
    robot: RobotModel
    weights: PlannerWeights
    start: Posture
    world_box: tuple
    stance_band: tuple | None = STANCE_BAND
    s_mu_floor: float = DEFAULT_S_MU_FLOOR
    force_weight: float = 0.0
    orientation_cap: float = np.deg2rad(20.0)
    side_filter: bool = True
    gait_order: tuple = (0, 1, 2, 3, 4, 5)
    format_version: int = 1

    def __post_init__(self):
        if self.mu <= 0:
            raise MalformedScenarioError("friction coefficient must be positive")
        if self.mass <= 0:
            raise MalformedScenarioError("mass must be positive")

    @property
    def goal_toes(self) -> np.ndarray:
        return self.weights.goal_toes

    def external_load(self) -> ExternalLoad:
        return ExternalLoad.gravity(mass=self.mass, g=self.g)


def planar_region(name, origin, normal, y_extent, z_lo, z_hi, mu) -> Region:
    """Axis-banded patch of the vertical plane through origin with ``normal``.

    Rows: two for the plane, two bounding the in-plane horizontal
    coordinate to +-y_extent around the origin, two for the height band.
    """
    origin = np.asarray(origin, dtype=float)
    normal = np.asarray(normal, dtype=float)
    normal = normal / np.linalg.norm(normal)
    u = np.array([-normal[1], normal[0], 0.0])  # horizontal, along the wall
    A = np.vstack([normal, -normal, u, -u, [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
    b = np.array(
        [
            normal @ origin,
            -(normal @ origin),
            u @ origin + y_extent,
            -(u @ origin) + y_extent,
            z_hi,
            -z_lo,
        ]
    )
    seed = origin.copy()
    seed[2] = 0.5 * (z_lo + z_hi)
    return Region(name=name, A=A, b=b, normal=normal, mu=mu, seed=seed)


def _nominal_stance(robot: RobotModel, regions: RegionSet, region_of, com, theta=None) -> Posture:
    """Start/goal stance: each toe at its region's plane point nearest the mount."""
    com = np.asarray(com, dtype=float)
    toes = np.empty((6, 3))
    assigned = []
    for i in range(6):
        r = region_of[i]
        region = regions[r]
        mount = com + robot.limbs[i].mount_offset
        # project the mount onto the wall plane (rows 0/1 are +-normal)
        toe = mount - float(region.A[0] @ mount - region.b[0]) * region.A[0]
        toe[2] = com[2] - STANCE_DROP
        toe = toe - float(region.A[0] @ toe - region.b[0]) * region.A[0]
        toes[i] = toe
        assigned.append(r)
    return Posture(
        round_index=0,
        p_com=com,
        theta_b=np.zeros(3) if theta is None else theta,
        toes=toes,
        regions=tuple(assigned),
    )


def _builtin_robot() -> RobotModel:
    return RobotModel(workspace_margin=BUILTIN_WORKSPACE_MARGIN)


def _calibrated_weight(scenario: WallScenario) -> float:
    """Push weight from bisection on the first gait instant of the start stance."""
    try:
        instants = gait_instants(
            scenario.start, scenario.start, scenario.regions, scenario.robot,
            order=scenario.gait_order,
        )
        return calibrate_push_weight(
            instants[0],
            scenario.external_load(),
            s_mu_floor=scenario.s_mu_floor,
            tau_max=scenario.robot.tau_max,
        )
    except (InstantKinematicsError, InfeasibleInstantError):
        return 0.0  # stance not executable; the pipeline will surface it


def scenario_parallel_steps(mu: float = 1.0, rounds: int = 6) -> WallScenario:
    """Parallel walls 1.230 m apart, each carrying a 40 mm x 200 mm step.

    Three regions per wall: the base wall below the step, the proud step
    face (gap narrowed to 1.150 m), and the base wall above it.
    """
    robot = _builtin_robot()
    xw = WALL_GAP / 2.0
    xs = xw - STEP_DEPTH
    z_step = (0.9, 0.9 + STEP_HEIGHT)
    regs = []
    for sgn, side in ((1.0, "right"), (-1.0, "left")):
        n = np.array([-sgn, 0.0, 0.0])
        regs.append(planar_region(f"{side}-below-step", [sgn * xw, 0.0, 0.0], n, 0.45, 0.0, z_step[0], mu))
        regs.append(planar_region(f"{side}-step-face", [sgn * xs, 0.0, 0.0], n, 0.45, z_step[0], z_step[1], mu))
        regs.append(planar_region(f"{side}-above-step", [sgn * xw, 0.0, 0.0], n, 0.45, z_step[1], 2.2, mu))
    regions = RegionSet(tuple(regs))

    start = _nominal_stance(robot, regions, (0, 0, 0, 3, 3, 3), com=[0.0, 0.0, 0.55])
    goal = _nominal_stance(robot, regions, (2, 2, 2, 5, 5, 5), com=[0.0, 0.0, 1.75])
    weights = PlannerWeights.defaults(goal_toes=goal.toes, rounds=rounds)
    scn = WallScenario(
        name="parallel-steps",
        mass=10.3,
        g=9.81,
        mu=mu,
        alpha=0.0,
        regions=regions,
        robot=robot,
        weights=weights,
        start=start,
        world_box=(np.array([-0.70, -0.60, 0.0]), np.array([0.70, 0.60, 2.3])),
    )
    return replace(scn, force_weight=_calibrated_weight(scn))


def scenario_obstacle(mu: float = 1.0, rounds: int = 8) -> WallScenario:
    """Parallel walls with an obstacle occluding part of the mid-height band.

    Each wall splits into lower, middle, and upper rectangles; the
    middle ones are laterally offset (the obstacle blocks the rest), so
    the planner must steer sideways while climbing.
    """
    robot = _builtin_robot()
    xw = WALL_GAP / 2.0
    regs = []
    for sgn, side in ((1.0, "right"), (-1.0, "left")):
        n = np.array([-sgn, 0.0, 0.0])
        regs.append(planar_region(f"{side}-lower", [sgn * xw, 0.0, 0.0], n, 0.45, 0.0, 0.8, mu))
        regs.append(planar_region(f"{side}-middle", [sgn * xw, 0.325, 0.0], n, 0.275, 0.8, 1.4, mu))
        regs.append(planar_region(f"{side}-upper", [sgn * xw, 0.0, 0.0], n, 0.45, 1.4, 2.4, mu))
    regions = RegionSet(tuple(regs))

    start = _nominal_stance(robot, regions, (0, 0, 0, 3, 3, 3), com=[0.0, 0.0, 0.55])
    goal = _nominal_stance(robot, regions, (2, 2, 2, 5, 5, 5), com=[0.0, 0.15, 1.75])
    weights = PlannerWeights.defaults(goal_toes=goal.toes, rounds=rounds)
    scn = WallScenario(
        name="obstacle",
        mass=10.3,
        g=9.81,
        mu=mu,
        alpha=0.0,
        regions=regions,
        robot=robot,
        weights=weights,
        start=start,
        world_box=(np.array([-0.70, -0.90, 0.0]), np.array([0.70, 0.90, 2.5])),
    )
    return replace(scn, force_weight=_calibrated_weight(scn))


def scenario_angled(alpha, mu: float = 1.0, rounds: int = 4, climb: float = 0.6) -> WallScenario:
    """Two flat walls at a horizontal angle ``alpha`` (radians).

    Each wall rotates by alpha/2 about the vertical axis, converging
    toward +y; the wall-to-wall distance at the torso (the middle-leg
    line, y = 0) stays fixed at the parallel-wall gap. alpha = 0 reduces
    to parallel walls with antiparallel normals.
    """
    alpha = float(alpha)
    if not 0.0 <= alpha < np.pi * 0.94:
        raise MalformedScenarioError("wall angle must be in [0, ~170 deg)")
    robot = _builtin_robot()
    half = alpha / 2.0
    xw = WALL_GAP / 2.0
    z_top = 1.2 + climb + 1.0
    regs = []
    for sgn, side in ((1.0, "right"), (-1.0, "left")):
        normal = np.array([-sgn * np.cos(half), -np.sin(half), 0.0])
        origin = np.array([sgn * xw, 0.0, 0.0])
        regs.append(planar_region(f"{side}-wall", origin, normal, 0.45, 0.0, z_top, mu))
    regions = RegionSet(tuple(regs))

    start = _nominal_stance(robot, regions, (0, 0, 0, 1, 1, 1), com=[0.0, 0.0, 0.55])
    goal = _nominal_stance(robot, regions, (0, 0, 0, 1, 1, 1), com=[0.0, 0.0, 0.55 + climb])
    weights = PlannerWeights.defaults(goal_toes=goal.toes, rounds=rounds)
    scn = WallScenario(
        name=f"angled-{np.rad2deg(alpha):.0f}deg",
        mass=10.3,
        g=9.81,
        mu=mu,
        alpha=alpha,
        regions=regions,
        robot=robot,
        weights=weights,
        start=start,
        world_box=(np.array([-1.0, -0.80, 0.0]), np.array([1.0, 0.80, z_top + 0.1])),
    )
    return replace(scn, force_weight=_calibrated_weight(scn))


BUILTIN_SCENARIOS = {
    "steps": scenario_parallel_steps,
    "obstacle": scenario_obstacle,
    "angled": scenario_angled,
}


# ---------------------------------------------------------------------------
# Scenario file format


def _vec(a) -> list:
    return [float(v) for v in np.asarray(a).reshape(-1)]


def _mat(a) -> list:
    return [[float(v) for v in row] for row in np.asarray(a)]


def scenario_to_dict(scn: WallScenario) -> dict:
    return {
        "format_version": scn.format_version,
        "units": "m",
        "name": scn.name,
        "gravity": {"mass": float(scn.mass), "g": float(scn.g)},
        "friction": float(scn.mu),
        "wall_angle_rad": float(scn.alpha),
        "robot": {
            "limbs": [
                {
                    "name": scn.robot.limb_names[i],
                    "coxa": float(g.coxa_length),
                    "femur": float(g.femur_length),
                    "tibia": float(g.tibia_length),
                    "mount_offset": _vec(g.mount_offset),
                    "mount_yaw": float(g.mount_yaw),
                }
                for i, g in enumerate(scn.robot.limbs)
            ],
            "servo_stiffness": _vec(scn.robot.servo_stiffness.k),
            "joint_limits": {
                "lower": _vec(scn.robot.joint_limits.lower),
                "upper": _vec(scn.robot.joint_limits.upper),
            },
            "tau_max": float(scn.robot.tau_max),
            "workspace_margin": float(scn.robot.workspace_margin),
        },
        "force": {
            "s_mu_floor": float(scn.s_mu_floor),
            "weight": float(scn.force_weight),
            "gait_order": [int(i) for i in scn.gait_order],
        },
        "planner": {
            "rounds": int(scn.weights.rounds),
            "W_g": _mat(scn.weights.W_g),
            "W_com": _mat(scn.weights.W_com),
            "W_s": _mat(scn.weights.W_s),
            "W_rot": _mat(scn.weights.W_rot),
            "dp_com_min": _vec(scn.weights.dp_com_min),
            "dp_com_max": _vec(scn.weights.dp_com_max),
            "dp_toe_min": _vec(scn.weights.dp_toe_min),
            "dp_toe_max": _vec(scn.weights.dp_toe_max),
            "dtheta_min": _vec(scn.weights.dtheta_min),
            "dtheta_max": _vec(scn.weights.dtheta_max),
            "orientation_cap": float(scn.orientation_cap),
            "stance_band": None if scn.stance_band is None else _vec(scn.stance_band),
            "side_filter": bool(scn.side_filter),
        },
        "regions": [
            {
                "name": r.name,
                "A": _mat(r.A),
                "b": _vec(r.b),
                "normal": _vec(r.normal),
                "mu": float(r.mu),
                "seed": _vec(r.seed),
            }
            for r in scn.regions.regions
        ],
        "start": {
            "com": _vec(scn.start.p_com),
            "theta": _vec(scn.start.theta_b),
            "toes": _mat(scn.start.toes),
            "regions": [int(r) for r in scn.start.regions],
        },
        "goal_toes": _mat(scn.weights.goal_toes),
        "world_box": {"lower": _vec(scn.world_box[0]), "upper": _vec(scn.world_box[1])},
    }


def scenario_from_dict(doc: dict) -> WallScenario:
    version = doc.get("format_version")
    if version != 1:
        raise MalformedScenarioError(f"unsupported scenario format_version {version!r}")
    units = doc.get("units", "m")
    if units not in ("m", "mm"):
        raise MalformedScenarioError(f"units must be 'm' or 'mm', got {units!r}")
    scale = 1.0 if units == "m" else 1e-3

    def L(x):  # lengths: apply unit conversion
        return np.asarray(x, dtype=float) * scale

    rd = doc["robot"]
    limbs = tuple(
        LimbGeometry(
            coxa_length=float(g["coxa"]) * scale,
            femur_length=float(g["femur"]) * scale,
            tibia_length=float(g["tibia"]) * scale,
            mount_offset=L(g["mount_offset"]),
            mount_yaw=float(g["mount_yaw"]),
        )
        for g in rd["limbs"]
    )
    robot = RobotModel(
        limbs=limbs,
        limb_names=tuple(g["name"] for g in rd["limbs"]),
        servo_stiffness=ServoStiffness(np.asarray(rd["servo_stiffness"], dtype=float)),
        joint_limits=JointLimits(
            lower=np.asarray(rd["joint_limits"]["lower"], dtype=float),
            upper=np.asarray(rd["joint_limits"]["upper"], dtype=float),
        ),
        tau_max=float(rd["tau_max"]),
        workspace_margin=float(rd["workspace_margin"]),
    )
    regions = RegionSet(
        tuple(
            Region(
                name=r["name"],
                # plane rows scale with length only on the rhs; A rows are
                # unit-normal direction rows so b carries the length unit
                A=np.asarray(r["A"], dtype=float),
                b=L(r["b"]),
                normal=np.asarray(r["normal"], dtype=float),
                mu=float(r["mu"]),
                seed=L(r["seed"]),
            )
            for r in doc["regions"]
        )
    )
    pd = doc["planner"]
    weights = PlannerWeights(
        goal_toes=L(doc["goal_toes"]),
        rounds=int(pd["rounds"]),
        W_g=np.asarray(pd["W_g"], dtype=float),
        W_com=np.asarray(pd["W_com"], dtype=float),
        W_s=np.asarray(pd["W_s"], dtype=float),
        W_rot=np.asarray(pd["W_rot"], dtype=float),
        dp_com_min=L(pd["dp_com_min"]),
        dp_com_max=L(pd["dp_com_max"]),
        dp_toe_min=L(pd["dp_toe_min"]),
        dp_toe_max=L(pd["dp_toe_max"]),
        dtheta_min=np.asarray(pd["dtheta_min"], dtype=float),
        dtheta_max=np.asarray(pd["dtheta_max"], dtype=float),
    )
    sd = doc["start"]
    start = Posture(
        round_index=0,
        p_com=L(sd["com"]),
        theta_b=np.asarray(sd["theta"], dtype=float),
        toes=L(sd["toes"]),
        regions=tuple(int(r) for r in sd["regions"]),
    )
    fd = doc["force"]
    band = pd.get("stance_band")
    return WallScenario(
        name=doc["name"],
        mass=float(doc["gravity"]["mass"]),
        g=float(doc["gravity"]["g"]),
        mu=float(doc["friction"]),
        alpha=float(doc["wall_angle_rad"]),
        regions=regions,
        robot=robot,
        weights=weights,
        start=start,
        world_box=(L(doc["world_box"]["lower"]), L(doc["world_box"]["upper"])),
        stance_band=None if band is None else tuple(float(v) * scale for v in band),
        s_mu_floor=float(fd["s_mu_floor"]),
        force_weight=float(fd["weight"]),
        orientation_cap=float(pd["orientation_cap"]),
        side_filter=bool(pd["side_filter"]),
        gait_order=tuple(int(i) for i in fd["gait_order"]),
        format_version=1,
    )


def dump_scenario(scn: WallScenario) -> str:
    return yaml.safe_dump(scenario_to_dict(scn), sort_keys=True, default_flow_style=None)


def save_scenario(scn: WallScenario, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(dump_scenario(scn))


def load_scenario(path) -> WallScenario:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise MalformedScenarioError(f"{path}: not a scenario file")
    return scenario_from_dict(doc)
