"""End-to-end planning pipeline and the (alpha, mu) feasibility sweep.

The pipeline runs the posture MICP, then walks every transition between
consecutive postures (starting from the start stance) through its 12
gait instants, solving the convex force program for each. A round is
accepted only if all 12 instants are feasible with the safety floors
met. Failures carry their stage and location: posture infeasibility
names the first failing round, kinematic failures name instant and
limb, force failures name instant and binding constraint family.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    InfeasibleInstantError,
    InfeasiblePlanError,
    InstantKinematicsError,
    MalformedScenarioError,
    UnreachableTargetError,
)
from .force import (
    SafetyFactors,
    build_force_program,
    gait_instants,
    preload_commands,
    solve_force_plan,
)
from .posture import build_posture_micp, solve_postures
from .scenarios import WallScenario, scenario_angled
from .trajectory import InstantRecord, RoundRecord, TrajectoryRecord

SAFETY_SLACK = 1e-6

FEASIBLE = "feasible"
FORCE_FAIL = "force-fail"
KINEMATIC_FAIL = "kinematic-fail"


@dataclass(frozen=True)
class FeasibilityCell:
    """One sweep grid point with its outcome label."""

    alpha: float
    mu: float
    label: str

    def __post_init__(self):
        if self.label not in (FEASIBLE, FORCE_FAIL, KINEMATIC_FAIL):
            raise ValueError(f"unknown feasibility label {self.label!r}")


def plan_pipeline(scenario: WallScenario, **solver_kwargs) -> TrajectoryRecord:
    """Plan postures, then solve all 12 force instants of every round."""
    program = build_posture_micp(
        scenario.regions,
        scenario.start,
        scenario.weights,
        scenario.robot,
        world_box=scenario.world_box,
        orientation_cap=scenario.orientation_cap,
        stance_band=scenario.stance_band,
        side_filter=scenario.side_filter,
    )
    postures = solve_postures(program, **solver_kwargs)

    load = scenario.external_load()
    rounds = []
    prev = scenario.start
    for posture in postures:
        instants = gait_instants(
            prev, posture, scenario.regions, scenario.robot, order=scenario.gait_order
        )
        records = []
        worst = SafetyFactors(s_mu=np.inf, s_tau=np.inf)
        for instant in instants:
            prog = build_force_program(
                instant,
                load,
                scenario.force_weight,
                s_mu_floor=scenario.s_mu_floor,
                tau_max=scenario.robot.tau_max,
            )
            plan = solve_force_plan(prog)
            if plan.safety.s_mu < scenario.s_mu_floor - SAFETY_SLACK or plan.safety.s_tau < 1.0 - SAFETY_SLACK:
                raise InfeasibleInstantError(
                    f"round {posture.round_index} instant {instant.index}: safety "
                    f"floors missed (S_mu {plan.safety.s_mu:.3f}, S_tau {plan.safety.s_tau:.3f})",
                    instant_index=instant.index,
                    family="safety-floor",
                )
            commands = preload_commands(plan, instant, scenario.robot)
            records.append(InstantRecord.from_plan(plan, commands))
            worst = SafetyFactors(
                s_mu=min(worst.s_mu, plan.safety.s_mu),
                s_tau=min(worst.s_tau, plan.safety.s_tau),
            )
        rounds.append(RoundRecord(posture=posture, instants=tuple(records), safety=worst))
        prev = posture

    return TrajectoryRecord(
        scenario_name=scenario.name,
        mass=scenario.mass,
        g=scenario.g,
        mu=scenario.mu,
        tau_max=scenario.robot.tau_max,
        s_mu_floor=scenario.s_mu_floor,
        force_weight=scenario.force_weight,
        limb_names=scenario.robot.limb_names,
        start=scenario.start,
        rounds=tuple(rounds),
    )


def _sweep_cell(alpha: float, mu: float, template, full: bool) -> FeasibilityCell:
    try:
        scenario = template(alpha, mu) if full else template(alpha, mu, rounds=1, climb=0.15)
    except MalformedScenarioError:
        return FeasibilityCell(alpha=alpha, mu=mu, label=KINEMATIC_FAIL)
    try:
        plan_pipeline(scenario)
    except (InfeasiblePlanError, InstantKinematicsError, UnreachableTargetError, MalformedScenarioError):
        return FeasibilityCell(alpha=alpha, mu=mu, label=KINEMATIC_FAIL)
    except InfeasibleInstantError:
        return FeasibilityCell(alpha=alpha, mu=mu, label=FORCE_FAIL)
    return FeasibilityCell(alpha=alpha, mu=mu, label=FEASIBLE)


def feasibility_sweep(
    alphas,
    mus,
    template=scenario_angled,
    full: bool = False,
    workers: int | None = None,
) -> list:
    """Label every (alpha, mu) grid point feasible/force-fail/kinematic-fail.

    Each cell plans one representative climbing round (a full multi-round
    plan with ``full=True``). Cells are independent and may run
    concurrently; the output order is by (alpha index, mu index)
    regardless of completion order.
    """
    alphas = list(alphas)
    mus = list(mus)
    if not alphas or not mus:
        raise ValueError("alpha and mu grids must be nonempty")
    cells = [(a, m) for a in alphas for m in mus]
    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda am: _sweep_cell(*am, template, full), cells))
    else:
        results = [_sweep_cell(a, m, template, full) for a, m in cells]
    return results
