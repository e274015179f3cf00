"""Exception types raised across the planner."""


class WallclimbError(Exception):
    """Base class for all planner errors."""


class UnreachableTargetError(WallclimbError):
    """Toe target outside the reachable set of a limb.

    ``closest_distance`` is how far the target lies outside the reachable
    annulus (0.0 when the failure is a joint limit rather than reach).
    """

    def __init__(self, message, closest_distance=0.0):
        super().__init__(message)
        self.closest_distance = float(closest_distance)


class NearSingularConfigurationError(WallclimbError):
    """Limb Jacobian too ill-conditioned to invert for the stiffness model."""

    def __init__(self, message, condition_number):
        super().__init__(message)
        self.condition_number = float(condition_number)


class RankDeficientContactError(WallclimbError):
    """Contact set cannot balance the requested load (inconsistent system)."""


class MalformedScenarioError(WallclimbError):
    """Scenario definition is structurally invalid (empty region, bad bounds)."""


class InfeasiblePlanError(WallclimbError):
    """Posture program has no feasible solution.

    ``round_index`` names the first planning round whose relaxation is
    infeasible (1-based), or None when even the empty prefix fails.
    """

    def __init__(self, message, round_index=None):
        super().__init__(message)
        self.round_index = round_index


class InfeasibleInstantError(WallclimbError):
    """Force program infeasible at one gait instant.

    ``family`` names the binding constraint family: 'torque',
    'friction-cone', or 'coupled'.
    """

    def __init__(self, message, instant_index, family):
        super().__init__(message)
        self.instant_index = int(instant_index)
        self.family = family


class InstantKinematicsError(WallclimbError):
    """IK failed for a limb at a named gait instant."""

    def __init__(self, message, instant_index, limb_index):
        super().__init__(message)
        self.instant_index = int(instant_index)
        self.limb_index = int(limb_index)


class DegeneratePlanError(WallclimbError):
    """Force plan has no usable contact (all normal forces zero under load)."""


class SolverNumericalError(WallclimbError):
    """Conic backend failed numerically; never silently clamped."""


class InsufficientBigMWarning(UserWarning):
    """Supplied big-M constant is smaller than the box-implied requirement."""


class LinearizationGapWarning(UserWarning):
    """Exact-rotation audit of a posture exceeded the reporting threshold."""
