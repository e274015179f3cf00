"""Independent verification of emitted trajectories.

Re-checks every solved instant of a trajectory file from the raw
numbers alone: static force/moment balance, friction-cone membership at
the configured safety floor, componentwise torque limits, and the
safety-factor floors. Deliberately shares no code with the solver
modules; everything is recomputed here from the file contents with
plain numpy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

EQUILIBRIUM_TOL = 1e-8
CONE_TOL = 1e-6
TORQUE_TOL = 1e-6
FLOOR_SLACK = 1e-6


@dataclass(frozen=True)
class InstantCheck:
    round_index: int
    instant_index: int
    force_residual: float
    moment_residual: float
    cone_violation: float
    torque_violation: float
    s_mu: float
    s_tau: float
    ok: bool


@dataclass(frozen=True)
class CheckReport:
    instants: tuple
    ok: bool

    @property
    def worst_force_residual(self) -> float:
        return max((c.force_residual for c in self.instants), default=0.0)

    @property
    def worst_moment_residual(self) -> float:
        return max((c.moment_residual for c in self.instants), default=0.0)

    def failures(self):
        return [c for c in self.instants if not c.ok]


def check_trajectory_dict(doc: dict) -> CheckReport:
    ph = doc["physics"]
    mass = float(ph["mass"])
    g = float(ph["g"])
    mu = float(ph["mu"])
    tau_max = float(ph["tau_max"])
    floor = float(ph["s_mu_floor"])
    gravity = np.array([0.0, 0.0, -mass * g])
    weight = mass * g

    checks = []
    for rnd in doc["rounds"]:
        round_index = int(rnd["posture"]["round"])
        for it in rnd["instants"]:
            contacts = [int(c) for c in it["contacts"]]
            forces = np.asarray(it["forces"], dtype=float)
            torques = np.asarray(it["torques"], dtype=float)
            normals = np.asarray(it["normals"], dtype=float)
            toes = np.asarray(it["toes"], dtype=float)
            com = np.asarray(it["body_com"], dtype=float)

            f_sum = forces[contacts].sum(axis=0)
            m_sum = np.zeros(3)
            for c in contacts:
                m_sum += np.cross(toes[c] - com, forces[c])
            force_residual = float(np.linalg.norm(f_sum + gravity)) / weight
            moment_residual = float(np.linalg.norm(m_sum)) / weight

            cone_violation = 0.0
            mu_c = 0.0
            for c in contacts:
                n = normals[c]
                normal = float(n @ forces[c])
                tangential = float(np.linalg.norm(forces[c] - normal * n))
                cone_violation = max(
                    cone_violation, tangential - (mu / floor) * normal, -normal
                )
                if normal > 1e-9:
                    mu_c = max(mu_c, tangential / normal)
                elif tangential > 1e-9:
                    mu_c = np.inf
            torque_violation = float(np.abs(torques).max() - tau_max)
            tau_c = float(np.abs(torques).max())
            s_mu = np.inf if mu_c == 0.0 else mu / mu_c
            s_tau = np.inf if tau_c == 0.0 else tau_max / tau_c

            ok = (
                force_residual <= EQUILIBRIUM_TOL
                and moment_residual <= EQUILIBRIUM_TOL
                and cone_violation <= CONE_TOL
                and torque_violation <= TORQUE_TOL
                and s_mu >= floor - FLOOR_SLACK
                and s_tau >= 1.0 - FLOOR_SLACK
            )
            checks.append(
                InstantCheck(
                    round_index=round_index,
                    instant_index=int(it["index"]),
                    force_residual=force_residual,
                    moment_residual=moment_residual,
                    cone_violation=cone_violation,
                    torque_violation=torque_violation,
                    s_mu=s_mu,
                    s_tau=s_tau,
                    ok=ok,
                )
            )
    return CheckReport(instants=tuple(checks), ok=all(c.ok for c in checks))


def check_trajectory_file(path) -> CheckReport:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    return check_trajectory_dict(doc)
