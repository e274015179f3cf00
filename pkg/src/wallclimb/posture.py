"""Multi-round posture planning as a mixed-integer convex program.

Decision variables per round: body COM position, linearized body
orientation, and six toe positions; binaries assign every toe to exactly
one convex contact region per round. Constraints: elementwise step-size
boxes on COM/orientation/toes, second-order-cone limb reachability with
the linearized rotation, and big-M region membership. The objective is
the quadratic goal distance of the final round plus quadratic shift
penalties on every executed step (the step of round 1 is measured from
the start posture).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linprog

from .conic import ConicProblem, ProblemBuilder, big_m_encode, solve_micp
from .errors import InfeasiblePlanError, LinearizationGapWarning, MalformedScenarioError
from .kinematics import rotation_exact, rotation_linearized, skew
from .robot import RobotModel

DEFAULT_ORIENTATION_CAP = np.deg2rad(20.0)
REGION_TOL = 1e-6
REACH_TOL = 1e-6
EXACT_ROTATION_FLAG = 1e-3


@dataclass(frozen=True)
class Region:
    """Convex contact patch {p : A p <= b} on a wall.

    ``normal`` is the unit wall normal pointing off the wall toward the
    robot (the direction of positive contact force). ``seed`` is a point
    satisfying the rows; it witnesses non-emptiness.
    """

    name: str
    A: np.ndarray
    b: np.ndarray
    normal: np.ndarray
    mu: float
    seed: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", np.atleast_2d(np.asarray(self.A, dtype=float)))
        object.__setattr__(self, "b", np.atleast_1d(np.asarray(self.b, dtype=float)))
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float))
        object.__setattr__(self, "seed", np.asarray(self.seed, dtype=float))
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-9:
            raise MalformedScenarioError(f"region {self.name}: normal must be unit length")
        if self.mu <= 0:
            raise MalformedScenarioError(f"region {self.name}: friction must be positive")
        if self.margin(self.seed) < -1e-9:
            raise MalformedScenarioError(
                f"region {self.name}: seed point violates the region rows "
                f"(margin {self.margin(self.seed):.3g}); region may be empty"
            )

    def margin(self, p) -> float:
        """Smallest row slack b - A p; >= 0 inside the region."""
        return float((self.b - self.A @ np.asarray(p, dtype=float)).min())

    def contains(self, p, tol: float = REGION_TOL) -> bool:
        return self.margin(p) >= -tol

    def axis_bounds(self, world_box) -> tuple:
        """Tight per-axis interval of the region clipped to the world box.

        Solved with six tiny LPs; used to tighten toe boxes and big-M
        sizes in the posture program.
        """
        lo_box, hi_box = world_box
        lo = np.empty(3)
        hi = np.empty(3)
        bounds = list(zip(lo_box, hi_box))
        for axis in range(3):
            c = np.zeros(3)
            c[axis] = 1.0
            r_min = linprog(c, A_ub=self.A, b_ub=self.b, bounds=bounds, method="highs")
            r_max = linprog(-c, A_ub=self.A, b_ub=self.b, bounds=bounds, method="highs")
            if not (r_min.success and r_max.success):
                raise MalformedScenarioError(
                    f"region {self.name}: empty after clipping to the world box"
                )
            lo[axis] = r_min.x[axis]
            hi[axis] = r_max.x[axis]
        return lo, hi

    @property
    def side(self) -> str | None:
        """Which wall the region belongs to, by normal direction."""
        if self.normal[0] < -1e-9:
            return "right"
        if self.normal[0] > 1e-9:
            return "left"
        return None


@dataclass(frozen=True)
class RegionSet:
    regions: tuple

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        if not self.regions:
            raise MalformedScenarioError("a scenario needs at least one contact region")

    def __len__(self):
        return len(self.regions)

    def __getitem__(self, k) -> Region:
        return self.regions[k]


@dataclass(frozen=True)
class Posture:
    """One planned round: body pose, six toes, and their region labels."""

    round_index: int
    p_com: np.ndarray
    theta_b: np.ndarray
    toes: np.ndarray
    regions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "p_com", np.asarray(self.p_com, dtype=float))
        object.__setattr__(self, "theta_b", np.asarray(self.theta_b, dtype=float))
        object.__setattr__(self, "toes", np.asarray(self.toes, dtype=float).reshape(6, 3))
        object.__setattr__(self, "regions", tuple(int(r) for r in self.regions))

    def toe_vector(self) -> np.ndarray:
        return self.toes.reshape(-1)


@dataclass(frozen=True)
class PlannerWeights:
    """Cost weights, step-size boxes, round count, and the toe goal."""

    goal_toes: np.ndarray
    rounds: int
    W_g: np.ndarray
    W_com: np.ndarray
    W_s: np.ndarray
    W_rot: np.ndarray
    dp_com_min: np.ndarray
    dp_com_max: np.ndarray
    dp_toe_min: np.ndarray
    dp_toe_max: np.ndarray
    dtheta_min: np.ndarray
    dtheta_max: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "goal_toes", np.asarray(self.goal_toes, dtype=float).reshape(6, 3))
        for name in ("W_g", "W_com", "W_s", "W_rot"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        for name in (
            "dp_com_min", "dp_com_max", "dp_toe_min",
            "dp_toe_max", "dtheta_min", "dtheta_max",
        ):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.rounds < 1:
            raise MalformedScenarioError("round count must be >= 1")
        for lo, hi in (
            (self.dp_com_min, self.dp_com_max),
            (self.dp_toe_min, self.dp_toe_max),
            (self.dtheta_min, self.dtheta_max),
        ):
            if np.any(hi < lo):
                raise MalformedScenarioError("step bounds need max >= min elementwise")
        for name in ("W_g", "W_com", "W_s", "W_rot"):
            W = getattr(self, name)
            if np.abs(W - W.T).max() > 1e-9:
                raise MalformedScenarioError(f"{name} must be symmetric")
            if np.linalg.eigvalsh(W).min() < -1e-9:
                raise MalformedScenarioError(f"{name} must be positive semidefinite")

    @classmethod
    def defaults(
        cls,
        goal_toes,
        rounds: int,
        goal_weight: float = 1e3,
        com_weight: float = 1.0,
        toe_weight: float = 0.5,
        rot_weight: float = 5.0,
        com_step: float = 0.25,
        toe_step: float = 0.25,
        theta_step_deg: float = 10.0,
    ) -> "PlannerWeights":
        ts = np.deg2rad(theta_step_deg)
        return cls(
            goal_toes=goal_toes,
            rounds=rounds,
            W_g=goal_weight * np.eye(18),
            W_com=com_weight * np.eye(3),
            W_s=toe_weight * np.eye(3),
            W_rot=rot_weight * np.eye(3),
            dp_com_min=np.full(3, -com_step),
            dp_com_max=np.full(3, com_step),
            dp_toe_min=np.full(3, -toe_step),
            dp_toe_max=np.full(3, toe_step),
            dtheta_min=np.full(3, -ts),
            dtheta_max=np.full(3, ts),
        )


@dataclass(frozen=True)
class AssignmentMatrix:
    """Binary region-assignment tensor H indexed (region, limb, round)."""

    H: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "H", np.asarray(self.H, dtype=float))

    def validate(self, tol: float = 1e-6):
        sums = self.H.sum(axis=0)
        if np.abs(sums - 1.0).max() > tol:
            raise ValueError("every (limb, round) must select exactly one region")
        if np.abs(self.H - np.round(self.H)).max() > tol:
            raise ValueError("assignment entries must be binary")

    def assigned(self) -> np.ndarray:
        """(limbs, rounds) array of selected region indices."""
        return np.argmax(self.H, axis=0)


@dataclass(frozen=True)
class PostureProgram:
    """Built MICP plus the variable layout needed to read solutions back."""

    problem: ConicProblem | None
    regions: RegionSet
    start: Posture
    weights: PlannerWeights
    robot: RobotModel
    world_box: tuple
    stance_band: tuple | None
    orientation_cap: float
    side_filter: bool

    def com_idx(self, j):
        return np.arange(j * 24, j * 24 + 3)

    def theta_idx(self, j):
        return np.arange(j * 24 + 3, j * 24 + 6)

    def toe_idx(self, j, i):
        base = j * 24 + 6 + 3 * i
        return np.arange(base, base + 3)

    def h_idx(self, j, i, r):
        R = len(self.regions)
        return self.weights.rounds * 24 + (j * 6 + i) * R + r


def _default_world_box(regions: RegionSet, start: Posture, pad: float = 1.0):
    pts = np.vstack([start.toes, start.p_com[None, :]] + [r.seed[None, :] for r in regions.regions])
    return pts.min(axis=0) - pad, pts.max(axis=0) + pad


def build_posture_micp(
    regions: RegionSet,
    start: Posture,
    weights: PlannerWeights,
    robot: RobotModel | None = None,
    *,
    world_box=None,
    orientation_cap: float = DEFAULT_ORIENTATION_CAP,
    stance_band=None,
    side_filter: bool = True,
) -> PostureProgram:
    """Assemble the posture MICP.

    ``world_box`` (lo3, hi3) bounds all positions and sizes the big-M
    constants; defaulted from the scenario extent when omitted.
    ``stance_band`` optionally constrains toe height relative to the COM
    plane, (lo, hi) with toe_z - com_z in [lo, hi]. ``side_filter``
    pins cross-side assignment binaries to zero (left limbs never target
    right-wall regions); the binaries remain in the problem.
    """
    robot = robot or RobotModel()
    M = weights.rounds
    R = len(regions)
    if world_box is None:
        world_box = _default_world_box(regions, start)
    box_lo = np.asarray(world_box[0], dtype=float)
    box_hi = np.asarray(world_box[1], dtype=float)
    if np.any(box_hi <= box_lo):
        raise MalformedScenarioError("world box must have positive extent")
    if np.abs(start.theta_b).max() > orientation_cap + 1e-9:
        raise MalformedScenarioError(
            "start orientation exceeds the linearized-rotation cap "
            f"({np.rad2deg(orientation_cap):.0f} deg); this planner only "
            "handles small body rotations"
        )

    b = ProblemBuilder()
    for j in range(M):
        b.add_variables(3, f"com[{j}]", lb=box_lo, ub=box_hi)
        b.add_variables(3, f"theta[{j}]", lb=-orientation_cap, ub=orientation_cap)
        for i in range(6):
            b.add_variables(3, f"toe[{j},{i}]", lb=box_lo, ub=box_hi)
    h_of = {}
    for j in range(M):
        for i in range(6):
            idx = b.add_variables(R, f"H[{j},{i}]", lb=0.0, ub=1.0, binary=True)
            for r in range(R):
                h_of[(j, i, r)] = int(idx[r])

    prog = PostureProgram(
        problem=None,  # filled after build
        regions=regions,
        start=start,
        weights=weights,
        robot=robot,
        world_box=(box_lo, box_hi),
        stance_band=tuple(stance_band) if stance_band is not None else None,
        orientation_cap=float(orientation_cap),
        side_filter=bool(side_filter),
    )

    # tighten every toe's box to the hull of its candidate regions; this
    # is implied by exactly-one + big-M but makes the relaxation (and the
    # big-M sizes) far tighter
    region_boxes = [r.axis_bounds((box_lo, box_hi)) for r in regions.regions]
    candidates = {}
    for i in range(6):
        limb_side = robot.limb_side(i)
        cand = [
            r
            for r, region in enumerate(regions.regions)
            if not (side_filter and region.side is not None and region.side != limb_side)
        ]
        if not cand:
            raise MalformedScenarioError(
                f"limb {i} has no candidate region on its side of the corridor"
            )
        candidates[i] = cand
        hull_lo = np.min([region_boxes[r][0] for r in cand], axis=0)
        hull_hi = np.max([region_boxes[r][1] for r in cand], axis=0)
        for j in range(M):
            toe_j = prog.toe_idx(j, i)
            for axis in range(3):
                b.set_bounds(toe_j[axis], lb=hull_lo[axis], ub=hull_hi[axis])

    full_lb = np.array(b._lb, dtype=float)
    full_ub = np.array(b._ub, dtype=float)

    for j in range(M):
        com_j = prog.com_idx(j)
        th_j = prog.theta_idx(j)
        # elementwise step boxes (constraints A and B); the step of round 1
        # is measured from the constant start posture
        if j == 0:
            for axis in range(3):
                b.add_range(
                    [com_j[axis]], [1.0],
                    start.p_com[axis] + weights.dp_com_min[axis],
                    start.p_com[axis] + weights.dp_com_max[axis],
                )
                b.add_range(
                    [th_j[axis]], [1.0],
                    start.theta_b[axis] + weights.dtheta_min[axis],
                    start.theta_b[axis] + weights.dtheta_max[axis],
                )
            for i in range(6):
                toe_j = prog.toe_idx(j, i)
                for axis in range(3):
                    b.add_range(
                        [toe_j[axis]], [1.0],
                        start.toes[i, axis] + weights.dp_toe_min[axis],
                        start.toes[i, axis] + weights.dp_toe_max[axis],
                    )
        else:
            com_p = prog.com_idx(j - 1)
            th_p = prog.theta_idx(j - 1)
            for axis in range(3):
                b.add_range(
                    [com_j[axis], com_p[axis]], [1.0, -1.0],
                    weights.dp_com_min[axis], weights.dp_com_max[axis],
                )
                b.add_range(
                    [th_j[axis], th_p[axis]], [1.0, -1.0],
                    weights.dtheta_min[axis], weights.dtheta_max[axis],
                )
            for i in range(6):
                toe_j = prog.toe_idx(j, i)
                toe_p = prog.toe_idx(j - 1, i)
                for axis in range(3):
                    b.add_range(
                        [toe_j[axis], toe_p[axis]], [1.0, -1.0],
                        weights.dp_toe_min[axis], weights.dp_toe_max[axis],
                    )

        for i in range(6):
            toe_j = prog.toe_idx(j, i)
            geom = robot.limbs[i]
            v = geom.mount_offset
            S = skew(v)
            # constraint C: || com + v - skew(v) theta - toe || <= reach
            rows = [(np.array([], dtype=int), np.array([]), robot.reach_radius(i))]
            for axis in range(3):
                cols = [com_j[axis], toe_j[axis], th_j[0], th_j[1], th_j[2]]
                vals = [1.0, -1.0, -S[axis, 0], -S[axis, 1], -S[axis, 2]]
                rows.append((np.array(cols), np.array(vals), float(v[axis])))
            b.add_soc(rows)

            if prog.stance_band is not None:
                lo, hi = prog.stance_band
                b.add_range([toe_j[2], com_j[2]], [1.0, -1.0], lo, hi)

            # constraint D: big-M region activation plus exactly-one
            limb_side = robot.limb_side(i)
            h_cols = []
            for r, region in enumerate(regions.regions):
                h = h_of[(j, i, r)]
                h_cols.append(h)
                for cols, vals, rhs in big_m_encode(
                    h, region.A, region.b, lb=full_lb, ub=full_ub, var_cols=toe_j
                ):
                    b.add_ub(cols, vals, rhs)
                if side_filter and region.side is not None and region.side != limb_side:
                    b.set_bounds(h, 0.0, 0.0)
            b.add_eq(np.array(h_cols), np.ones(R), 1.0)

    # objective: final-round goal distance plus per-step shift penalties
    goal = weights.goal_toes.reshape(-1)
    final_toes = np.concatenate([prog.toe_idx(M - 1, i) for i in range(6)])
    b.add_quadratic(final_toes, weights.W_g)
    b.add_linear(final_toes, -2.0 * weights.W_g @ goal)
    b.add_constant(goal @ weights.W_g @ goal)

    def add_step_cost(idx_now, idx_prev_or_const, W, const_prev=None):
        b.add_quadratic(idx_now, W)
        if const_prev is None:
            b.add_quadratic(idx_prev_or_const, W)
            b.add_cross_quadratic(idx_now, idx_prev_or_const, -W)
        else:
            b.add_linear(idx_now, -2.0 * W @ const_prev)
            b.add_constant(const_prev @ W @ const_prev)

    for j in range(M):
        if j == 0:
            add_step_cost(prog.com_idx(0), None, weights.W_com, const_prev=start.p_com)
            add_step_cost(prog.theta_idx(0), None, weights.W_rot, const_prev=start.theta_b)
            for i in range(6):
                add_step_cost(prog.toe_idx(0, i), None, weights.W_s, const_prev=start.toes[i])
        else:
            add_step_cost(prog.com_idx(j), prog.com_idx(j - 1), weights.W_com)
            add_step_cost(prog.theta_idx(j), prog.theta_idx(j - 1), weights.W_rot)
            for i in range(6):
                add_step_cost(prog.toe_idx(j, i), prog.toe_idx(j - 1, i), weights.W_s)

    return replace(prog, problem=b.build())


def assignment_purifier(program: PostureProgram):
    """Crossover hook for the branch-and-bound driver.

    Region binaries never enter the cost, so relaxations come back with
    fractional assignments even when a toe already sits inside a single
    region. Each decided toe's group is snapped to the max-margin
    one-hot assignment (respecting binaries already fixed by branching);
    groups whose toe genuinely straddles regions keep their relaxed
    values so the driver branches on them.
    """
    M, R = program.weights.rounds, len(program.regions)

    def purify(x, lb, ub):
        x_new = np.array(x, dtype=float)
        for j in range(M):
            for i in range(6):
                h = [program.h_idx(j, i, r) for r in range(R)]
                toe = x[program.toe_idx(j, i)]
                forced = [r for r in range(R) if lb[h[r]] > 0.5]
                if forced:
                    pick = forced[0]  # relaxation already enforced this region
                else:
                    allowed = [r for r in range(R) if ub[h[r]] > 0.5]
                    margins = [program.regions[r].margin(toe) for r in allowed]
                    best = int(np.argmax(margins))
                    if margins[best] < -1e-9:
                        continue  # straddling toe: leave the group fractional
                    pick = allowed[best]
                for r in range(R):
                    x_new[h[r]] = 1.0 if r == pick else 0.0
        return x_new

    return purify


def extract_assignment(program: PostureProgram, x) -> AssignmentMatrix:
    M, R = program.weights.rounds, len(program.regions)
    H = np.zeros((R, 6, M))
    for j in range(M):
        for i in range(6):
            for r in range(R):
                H[r, i, j] = x[program.h_idx(j, i, r)]
    return AssignmentMatrix(H=np.round(H))


def solve_postures(program: PostureProgram, **solver_kwargs) -> list:
    """Solve the posture MICP and read back the per-round postures.

    On infeasibility the failing prefix is located by re-solving rounds
    1..k for growing k, and the error names the first infeasible round.
    Postures violating exact-rotation reachability by more than 1 mm are
    flagged with LinearizationGapWarning (the linearization gap), not
    failed.
    """
    solver_kwargs.setdefault("purify", assignment_purifier(program))
    result = solve_micp(program.problem, **solver_kwargs)
    if result.status == "infeasible":
        bad = _first_bad_round(program, **solver_kwargs)
        raise InfeasiblePlanError(
            f"posture program infeasible starting at round {bad}", round_index=bad
        )
    if result.status != "optimal":
        raise InfeasiblePlanError(f"posture solve ended with status {result.status}")

    x = result.x
    assignment = extract_assignment(program, x)
    assignment.validate()
    assigned = assignment.assigned()

    postures = []
    for j in range(program.weights.rounds):
        posture = Posture(
            round_index=j + 1,
            p_com=x[program.com_idx(j)],
            theta_b=x[program.theta_idx(j)],
            toes=np.vstack([x[program.toe_idx(j, i)] for i in range(6)]),
            regions=tuple(int(assigned[i, j]) for i in range(6)),
        )
        _verify_posture(program, posture)
        postures.append(posture)
    return postures


def _first_bad_round(program: PostureProgram, **solver_kwargs) -> int:
    solver_kwargs.pop("purify", None)  # layouts differ per prefix
    for k in range(1, program.weights.rounds + 1):
        sub = build_posture_micp(
            program.regions,
            program.start,
            replace(program.weights, rounds=k),
            program.robot,
            world_box=program.world_box,
            orientation_cap=program.orientation_cap,
            stance_band=program.stance_band,
            side_filter=program.side_filter,
        )
        status = solve_micp(sub.problem, purify=assignment_purifier(sub), **solver_kwargs).status
        if status == "infeasible":
            return k
    return program.weights.rounds


def _verify_posture(program: PostureProgram, posture: Posture):
    robot = program.robot
    R_lin = rotation_linearized(posture.theta_b)
    R_ex = rotation_exact(posture.theta_b)
    for i in range(6):
        region = program.regions[posture.regions[i]]
        margin = region.margin(posture.toes[i])
        if margin < -REGION_TOL:
            raise InfeasiblePlanError(
                f"round {posture.round_index}: toe {i} violates its region by {-margin:.3g} m"
            )
        reach = robot.reach_radius(i)
        v = robot.limbs[i].mount_offset
        d_lin = np.linalg.norm(posture.p_com + R_lin @ v - posture.toes[i])
        if d_lin > reach + REACH_TOL:
            raise InfeasiblePlanError(
                f"round {posture.round_index}: toe {i} violates linearized reachability"
            )
        d_ex = np.linalg.norm(posture.p_com + R_ex @ v - posture.toes[i])
        if d_ex > reach + EXACT_ROTATION_FLAG:
            warnings.warn(
                f"round {posture.round_index}, limb {i}: exact-rotation reach "
                f"exceeds the ball by {d_ex - reach:.4g} m (linearization gap)",
                LinearizationGapWarning,
            )


@dataclass(frozen=True)
class RoundMargins:
    round_index: int
    com_step: float
    theta_step: float
    toe_step: float
    reach_lin: float
    reach_exact: float
    region: float
    exactly_one: bool


@dataclass(frozen=True)
class PostureValidation:
    rounds: tuple
    ok: bool
    linearization_flags: tuple


def validate_posture_sequence(
    postures,
    regions: RegionSet,
    weights: PlannerWeights,
    start: Posture,
    robot: RobotModel | None = None,
    tol: float = REGION_TOL,
) -> PostureValidation:
    """Pure post-hoc margins for every constraint family, per round.

    Margins are signed slacks (>= 0 means satisfied). The exact-rotation
    reach margin is reported alongside the linearized one; rounds where
    it dips below -1 mm are listed in ``linearization_flags``.
    """
    robot = robot or RobotModel()
    rounds = []
    flags = []
    prev = start
    for posture in postures:
        dcom = posture.p_com - prev.p_com
        dth = posture.theta_b - prev.theta_b
        com_step = float(
            min((weights.dp_com_max - dcom).min(), (dcom - weights.dp_com_min).min())
        )
        theta_step = float(
            min((weights.dtheta_max - dth).min(), (dth - weights.dtheta_min).min())
        )
        toe_step = np.inf
        reach_lin = np.inf
        reach_exact = np.inf
        region_margin = np.inf
        R_lin = rotation_linearized(posture.theta_b)
        R_ex = rotation_exact(posture.theta_b)
        for i in range(6):
            dt = posture.toes[i] - prev.toes[i]
            toe_step = min(
                toe_step,
                float((weights.dp_toe_max - dt).min()),
                float((dt - weights.dp_toe_min).min()),
            )
            v = robot.limbs[i].mount_offset
            reach = robot.reach_radius(i)
            reach_lin = min(
                reach_lin,
                reach - float(np.linalg.norm(posture.p_com + R_lin @ v - posture.toes[i])),
            )
            reach_exact = min(
                reach_exact,
                reach - float(np.linalg.norm(posture.p_com + R_ex @ v - posture.toes[i])),
            )
            region_margin = min(region_margin, regions[posture.regions[i]].margin(posture.toes[i]))
        exactly_one = len(posture.regions) == 6 and all(
            0 <= r < len(regions) for r in posture.regions
        )
        rounds.append(
            RoundMargins(
                round_index=posture.round_index,
                com_step=com_step,
                theta_step=theta_step,
                toe_step=float(toe_step),
                reach_lin=float(reach_lin),
                reach_exact=float(reach_exact),
                region=float(region_margin),
                exactly_one=exactly_one,
            )
        )
        if reach_exact < -EXACT_ROTATION_FLAG:
            flags.append(posture.round_index)
        prev = posture

    ok = all(
        m.exactly_one
        and min(m.com_step, m.theta_step, m.toe_step, m.reach_lin, m.region) >= -tol
        for m in rounds
    )
    return PostureValidation(rounds=tuple(rounds), ok=ok, linearization_flags=tuple(flags))
