"""Per-instant contact-force planning between consecutive postures.

A fixed one-leg gait executes each planned round: lift a leg, place it
at its next contact, push the body up, repeat. Twelve critical instants
are checked per round (six leg-lifted with five contacts, six body-push
with six). For each instant a convex program chooses wall-imposed toe
deflections, the resulting sag-down, contact forces, and torques, while
minimizing the inverse torque safety factor minus a reward w on total
normal push. Friction safety uses cones shrunk by a fixed factor floor;
pushing harder loosens the effective friction bound but eats torque
margin, which is exactly the trade-off w tunes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .compliance import (
    ExternalLoad,
    assemble_whole_body,
    contact_forces,
    equilibrium_residual,
    joint_torques,
    limb_stiffness,
    solve_sagdown,
    toe_cross_matrix,
)
from .conic import ConicProblem, ProblemBuilder, solve_continuous
from .errors import (
    DegeneratePlanError,
    InfeasibleInstantError,
    InstantKinematicsError,
    UnreachableTargetError,
)
from .kinematics import BodyPose, inverse_kinematics_world, world_jacobian
from .posture import Posture, RegionSet
from .robot import RobotModel

DEFAULT_S_MU_FLOOR = 1.8
DEFAULT_GAIT_ORDER = (0, 1, 2, 3, 4, 5)  # RF, RM, RB, LF, LM, LB
INSTANTS_PER_ROUND = 12
EQUILIBRIUM_TOL = 1e-8


@dataclass(frozen=True)
class SafetyFactors:
    """Achieved safety margins of a plan: friction (S_mu) and torque (S_tau)."""

    s_mu: float
    s_tau: float


@dataclass(frozen=True)
class GaitInstant:
    """One quasi-static configuration between two postures.

    ``toes`` holds current world toe positions for all six limbs; the
    lifted limb's entry is its landing target. Joint angles, world-frame
    Jacobians, and stiffness matrices are evaluated for all six limbs at
    the instant's interpolated body pose.
    """

    round_index: int
    index: int  # 1..12 within the round
    phase: str  # 'leg-lifted' | 'body-push'
    lifted: int | None
    contacts: tuple
    body: BodyPose
    toes: np.ndarray
    normals: np.ndarray
    mus: np.ndarray
    joint_angles: tuple
    jacobians: tuple
    stiffness: tuple

    def __post_init__(self):
        object.__setattr__(self, "toes", np.asarray(self.toes, dtype=float).reshape(6, 3))
        object.__setattr__(self, "normals", np.asarray(self.normals, dtype=float).reshape(6, 3))
        object.__setattr__(self, "mus", np.asarray(self.mus, dtype=float))
        n = 5 if self.phase == "leg-lifted" else 6
        if len(self.contacts) != n:
            raise ValueError(f"{self.phase} instant must have {n} contacts")


@dataclass(frozen=True)
class ForcePlan:
    """Solved force distribution for one gait instant."""

    instant: GaitInstant
    forces: np.ndarray
    delta_wall: np.ndarray
    delta_com: np.ndarray
    torques: np.ndarray
    s_tau_inv: float
    safety: SafetyFactors
    objective: float
    weight: float
    s_mu_floor: float

    def __post_init__(self):
        for name in ("forces", "delta_wall", "torques"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(6, 3))
        object.__setattr__(self, "delta_com", np.asarray(self.delta_com, dtype=float))

    @property
    def total_normal_push(self) -> float:
        return float(
            sum(
                self.instant.normals[i] @ self.forces[i]
                for i in self.instant.contacts
            )
        )


def _resolve_order(order, robot: RobotModel):
    if order is None:
        return DEFAULT_GAIT_ORDER
    resolved = []
    for item in order:
        if isinstance(item, str):
            resolved.append(robot.limb_names.index(item))
        else:
            resolved.append(int(item))
    if sorted(resolved) != list(range(6)):
        raise ValueError("gait order must be a permutation of the six limbs")
    return tuple(resolved)


def gait_instants(
    prev: Posture,
    next: Posture,
    regions: RegionSet,
    robot: RobotModel | None = None,
    order=None,
) -> list:
    """The 12 critical instants executing the step from prev to next.

    For each limb in gait order: a leg-lifted instant (limb in swing,
    five contacts, body not yet advanced) followed by a body-push
    instant (limb landed, six contacts, body advanced by 1/6 of the
    step). Joint angles come from IK at the interpolated body pose; an
    unreachable toe names the instant and limb in the raised error.
    """
    robot = robot or RobotModel()
    order = _resolve_order(order, robot)

    def body_at(frac: float) -> BodyPose:
        return BodyPose(
            p_com=prev.p_com + frac * (next.p_com - prev.p_com),
            theta_b=prev.theta_b + frac * (next.theta_b - prev.theta_b),
        )

    instants = []
    for k, limb in enumerate(order):
        moved = set(order[: k + 1])  # limbs already at their next contact
        for phase, frac, contacts in (
            ("leg-lifted", k / 6.0, tuple(i for i in range(6) if i != limb)),
            ("body-push", (k + 1) / 6.0, tuple(range(6))),
        ):
            body = body_at(frac)
            toes = np.empty((6, 3))
            normals = np.empty((6, 3))
            mus = np.empty(6)
            for i in range(6):
                at_next = i in moved
                source = next if at_next else prev
                toes[i] = source.toes[i]
                region = regions[source.regions[i]]
                normals[i] = region.normal
                mus[i] = region.mu
            index = 2 * k + (1 if phase == "leg-lifted" else 2)
            angles = []
            jacobians = []
            stiffness = []
            for i in range(6):
                try:
                    q = inverse_kinematics_world(
                        robot.limbs[i], body, toes[i], robot.joint_limits
                    )
                except UnreachableTargetError as exc:
                    raise InstantKinematicsError(
                        f"round {next.round_index} instant {index}: limb "
                        f"{robot.limb_names[i]} cannot reach {np.round(toes[i], 4).tolist()}: {exc}",
                        instant_index=index,
                        limb_index=i,
                    ) from exc
                J = world_jacobian(robot.limbs[i], body, q)
                angles.append(q)
                jacobians.append(J)
                stiffness.append(limb_stiffness(J, robot.servo_stiffness))
            instants.append(
                GaitInstant(
                    round_index=next.round_index,
                    index=index,
                    phase=phase,
                    lifted=limb if phase == "leg-lifted" else None,
                    contacts=contacts,
                    body=body,
                    toes=toes,
                    normals=normals,
                    mus=mus,
                    joint_angles=tuple(angles),
                    jacobians=tuple(jacobians),
                    stiffness=tuple(stiffness),
                )
            )
    return instants


@dataclass(frozen=True)
class ForceProgram:
    """Built convex program for one instant plus its extraction layout."""

    problem: ConicProblem | None
    instant: GaitInstant
    load: ExternalLoad
    weight: float
    s_mu_floor: float
    tau_max: float

    def f_idx(self, i):
        return np.arange(3 * i, 3 * i + 3)

    def dwall_idx(self, i):
        return np.arange(18 + 3 * i, 18 + 3 * i + 3)

    def tau_idx(self, i):
        return np.arange(36 + 3 * i, 36 + 3 * i + 3)

    @property
    def dcom_idx(self):
        return np.arange(54, 60)

    @property
    def s_idx(self):
        return 60

    def cross_matrices(self):
        com = self.instant.body.p_com
        return [toe_cross_matrix(self.instant.toes[i] - com) for i in range(6)]


def build_force_program(
    instant: GaitInstant,
    load: ExternalLoad,
    weight: float,
    s_mu_floor: float = DEFAULT_S_MU_FLOOR,
    tau_max: float = 26.0,
) -> ForceProgram:
    """Assemble the per-instant convex program.

    Decision variables (61): per-limb contact force, wall deflection and
    torque (zeroed by bounds for the lifted limb), the 6-dof sag-down,
    and the inverse torque safety factor. Compliance and torque maps
    enter as equalities, torque limits as linear rows against the
    inverse factor, and friction as exact second-order cones shrunk by
    the safety floor.
    """
    b = ProblemBuilder()
    f_idx = [b.add_variables(3, f"f[{i}]") for i in range(6)]
    dw_idx = [b.add_variables(3, f"dwall[{i}]") for i in range(6)]
    tau_idx = [b.add_variables(3, f"tau[{i}]") for i in range(6)]
    dcom = b.add_variables(6, "dcom")
    s = b.add_variables(1, "s_tau_inv", lb=0.0, ub=1.0)[0]

    prog = ForceProgram(
        problem=None,
        instant=instant,
        load=load,
        weight=float(weight),
        s_mu_floor=float(s_mu_floor),
        tau_max=float(tau_max),
    )

    lifted = instant.lifted
    if lifted is not None:
        for idx in (f_idx[lifted], dw_idx[lifted], tau_idx[lifted]):
            b.set_bounds(idx, 0.0, 0.0)

    P_all = prog.cross_matrices()
    contacts = list(instant.contacts)
    K_of = {i: np.asarray(instant.stiffness[i], dtype=float) for i in contacts}

    # sag-down balance: A dcom - sum([K; P K] dwall_i) = [F; M]
    A = assemble_whole_body([(K_of[i], P_all[i]) for i in contacts])
    FM = load.stacked()
    for row in range(6):
        cols = list(dcom)
        vals = list(A[row])
        for i in contacts:
            KP = K_of[i] if row < 3 else P_all[i] @ K_of[i]
            cols.extend(dw_idx[i])
            vals.extend(-KP[row if row < 3 else row - 3])
        b.add_eq(np.array(cols), np.array(vals), FM[row])

    for i in contacts:
        K = K_of[i]
        P = P_all[i]
        KIP = np.hstack([K, K @ P.T])  # K [I P^T]
        for row in range(3):
            # f_i - K dwall_i + K [I P^T] dcom = 0
            cols = [f_idx[i][row], *dw_idx[i], *dcom]
            vals = [1.0, *(-K[row]), *KIP[row]]
            b.add_eq(np.array(cols), np.array(vals), 0.0)
            # tau_i = J_i^T f_i
            J = np.asarray(instant.jacobians[i], dtype=float)
            b.add_eq(
                np.array([tau_idx[i][row], *f_idx[i]]),
                np.array([1.0, *(-J[:, row])]),
                0.0,
            )
        # |tau| <= s_tau_inv * tau_max, componentwise
        for row in range(3):
            b.add_ub(np.array([tau_idx[i][row], s]), np.array([1.0, -tau_max]), 0.0)
            b.add_ub(np.array([tau_idx[i][row], s]), np.array([-1.0, -tau_max]), 0.0)
        # nonnegative push plus the shrunk friction cone
        n = instant.normals[i]
        b.add_ub(f_idx[i], -n, 0.0)
        shrunk = instant.mus[i] / s_mu_floor
        tangent = np.eye(3) - np.outer(n, n)
        rows = [(f_idx[i], shrunk * n, 0.0)]
        for row in range(3):
            rows.append((f_idx[i], tangent[row], 0.0))
        b.add_soc(rows)

    b.add_linear([s], [1.0])
    for i in contacts:
        b.add_linear(f_idx[i], -weight * instant.normals[i])

    problem = b.build()
    assert problem.num_vars == 61
    return ForceProgram(
        problem=problem,
        instant=instant,
        load=load,
        weight=float(weight),
        s_mu_floor=float(s_mu_floor),
        tau_max=float(tau_max),
    )


def solve_force_plan(program: ForceProgram) -> ForcePlan:
    """Solve one instant and recover an exactly-balanced plan.

    The optimizer's wall deflections are kept and the sag-down, forces,
    and torques are recomputed through the compliance model, so the
    returned plan satisfies the balance equations to machine precision.
    On infeasibility the binding family is identified by re-solving with
    each family relaxed, and the error names instant and family.
    """
    result = solve_continuous(program.problem)
    if result.status != "optimal":
        family = _infeasibility_family(program)
        raise InfeasibleInstantError(
            f"round {program.instant.round_index} instant {program.instant.index} "
            f"({program.instant.phase}) infeasible; binding family: {family}",
            instant_index=program.instant.index,
            family=family,
        )

    x = result.x
    instant = program.instant
    contacts = list(instant.contacts)
    P_all = program.cross_matrices()
    pairs = [(np.asarray(instant.stiffness[i], dtype=float), P_all[i]) for i in contacts]
    dwall = np.zeros((6, 3))
    for i in contacts:
        dwall[i] = x[program.dwall_idx(i)]
    A = assemble_whole_body(pairs)
    delta_com = solve_sagdown(A, program.load, pairs, [dwall[i] for i in contacts])
    f_list = contact_forces(pairs, [dwall[i] for i in contacts], delta_com)
    forces = np.zeros((6, 3))
    torques = np.zeros((6, 3))
    for i, f in zip(contacts, f_list):
        forces[i] = f
        torques[i] = joint_torques(instant.jacobians[i], f)

    residual = equilibrium_residual(pairs, f_list, program.load)
    if residual > EQUILIBRIUM_TOL:
        raise InfeasibleInstantError(
            f"instant {instant.index}: recovered plan violates equilibrium "
            f"({residual:.3g} relative)",
            instant_index=instant.index,
            family="equilibrium",
        )

    mu = float(np.min(instant.mus[contacts]))
    plan = ForcePlan(
        instant=instant,
        forces=forces,
        delta_wall=dwall,
        delta_com=delta_com,
        torques=torques,
        s_tau_inv=float(x[program.s_idx]),
        safety=SafetyFactors(s_mu=np.inf, s_tau=np.inf),
        objective=float(result.objective),
        weight=program.weight,
        s_mu_floor=program.s_mu_floor,
    )
    return replace(plan, safety=evaluate_safety(plan, mu, program.tau_max))


def _infeasibility_family(program: ForceProgram) -> str:
    """Name which constraint family blocks an infeasible instant."""
    no_torque = build_force_program(
        program.instant,
        program.load,
        program.weight,
        s_mu_floor=program.s_mu_floor,
        tau_max=program.tau_max * 1e6,
    )
    if solve_continuous(no_torque.problem).is_optimal:
        return "torque"
    wide_cone = build_force_program(
        program.instant,
        program.load,
        program.weight,
        s_mu_floor=program.s_mu_floor * 1e-6,
        tau_max=program.tau_max,
    )
    if solve_continuous(wide_cone.problem).is_optimal:
        return "friction-cone"
    return "coupled"


def evaluate_safety(plan: ForcePlan, mu: float, tau_max: float) -> SafetyFactors:
    """Achieved safety factors of a plan.

    The critical friction coefficient is the worst tangential/normal
    ratio over loaded contacts (contacts carrying no force at all are
    skipped, matching the lifted leg's zero friction demand); the
    critical torque is the worst joint torque magnitude.
    """
    mu_c = 0.0
    any_loaded = False
    for i in plan.instant.contacts:
        f = plan.forces[i]
        n = plan.instant.normals[i]
        normal = float(n @ f)
        tangential = float(np.linalg.norm(f - normal * n))
        if normal <= 1e-9:
            if tangential > 1e-9:
                mu_c = np.inf
            continue
        any_loaded = True
        mu_c = max(mu_c, tangential / normal)
    if not any_loaded and float(np.linalg.norm(plan.forces)) > 1e-9:
        raise DegeneratePlanError("plan carries force but no positive contact normal")

    tau_c = float(np.abs(plan.torques).max())
    s_mu = np.inf if mu_c == 0.0 else mu / mu_c
    s_tau = np.inf if tau_c == 0.0 else tau_max / tau_c
    return SafetyFactors(s_mu=float(s_mu), s_tau=float(s_tau))


def preload_commands(plan: ForcePlan, instant: GaitInstant, robot: RobotModel | None = None):
    """Joint commands realizing the squeeze: toes displaced by delta_wall.

    Position control reaches the planned force by commanding each toe to
    its contact point displaced through the wall; the wall yields by
    exactly delta_wall. The lifted limb gets its nominal landing command.
    """
    robot = robot or RobotModel()
    commands = []
    for i in range(6):
        target = instant.toes[i] + plan.delta_wall[i]
        try:
            q = inverse_kinematics_world(robot.limbs[i], instant.body, target, robot.joint_limits)
        except UnreachableTargetError as exc:
            raise InstantKinematicsError(
                f"instant {instant.index}: preload target of limb "
                f"{robot.limb_names[i]} unreachable: {exc}",
                instant_index=instant.index,
                limb_index=i,
            ) from exc
        commands.append(q)
    return tuple(commands)


def calibrate_push_weight(
    instant: GaitInstant,
    load: ExternalLoad,
    s_mu_floor: float = DEFAULT_S_MU_FLOOR,
    tau_max: float = 26.0,
    target_ratio: float = 1.05,
    rel_tol: float = 0.01,
    max_iters: int = 40,
) -> float:
    """Bisect the push weight until achieved S_mu is ~target_ratio * floor.

    At w = 0 the solver pushes as little as the shrunk cones allow, so
    the achieved S_mu sits at the floor; it is nondecreasing in w.
    """
    mu = float(np.min(instant.mus[list(instant.contacts)]))
    target = target_ratio * s_mu_floor

    def achieved(w: float) -> float:
        prog = build_force_program(instant, load, w, s_mu_floor=s_mu_floor, tau_max=tau_max)
        plan = solve_force_plan(prog)
        return plan.safety.s_mu

    if achieved(0.0) >= target:
        return 0.0  # minimum-torque push already clears the target margin

    w_lo, w_hi = 0.0, 1e-4
    for _ in range(max_iters):
        if achieved(w_hi) >= target:
            break
        w_lo, w_hi = w_hi, w_hi * 2.0
    else:
        return w_hi  # torque-capped before reaching the target; push hardest

    for _ in range(max_iters):
        w_mid = 0.5 * (w_lo + w_hi)
        val = achieved(w_mid)
        if abs(val - target) <= rel_tol * s_mu_floor:
            return w_mid
        if val < target:
            w_lo = w_mid
        else:
            w_hi = w_mid
    return 0.5 * (w_lo + w_hi)
