"""Two-stage motion planner for a hexapod climbing between two walls.

Stage one plans multi-round body postures and toe placements as a
mixed-integer convex program; stage two resolves the statically
indeterminate contact forces of each gait instant with a convex program
over a whole-body stiffness model, trading torque margin against
friction margin under explicit safety factors.
"""

from .compliance import ExternalLoad, ServoStiffness
from .errors import WallclimbError
from .force import ForcePlan, GaitInstant, SafetyFactors, gait_instants
from .kinematics import BodyPose, JointAngles, LimbGeometry
from .pipeline import FeasibilityCell, feasibility_sweep, plan_pipeline
from .posture import PlannerWeights, Posture, Region, RegionSet
from .robot import RobotModel
from .scenarios import (
    WallScenario,
    load_scenario,
    save_scenario,
    scenario_angled,
    scenario_obstacle,
    scenario_parallel_steps,
)
from .trajectory import TrajectoryRecord, emit_force_report, emit_trajectory, load_trajectory

__version__ = "0.1.0"

__all__ = [
    "BodyPose",
    "ExternalLoad",
    "FeasibilityCell",
    "ForcePlan",
    "GaitInstant",
    "JointAngles",
    "LimbGeometry",
    "PlannerWeights",
    "Posture",
    "Region",
    "RegionSet",
    "RobotModel",
    "SafetyFactors",
    "ServoStiffness",
    "TrajectoryRecord",
    "WallScenario",
    "WallclimbError",
    "emit_force_report",
    "emit_trajectory",
    "feasibility_sweep",
    "gait_instants",
    "load_scenario",
    "load_trajectory",
    "plan_pipeline",
    "save_scenario",
    "scenario_angled",
    "scenario_obstacle",
    "scenario_parallel_steps",
    "__version__",
]
