"""Trajectory records, the trajectory file format, and the force report.

A trajectory file is YAML mirroring TrajectoryRecord plus the physical
context an independent checker needs (load, friction, torque limit,
safety floors, per-contact normals). The force report is a CSV with
header ``round,instant,phase,limb,fx,fy,fz,tau1,tau2,tau3,mu_c,S_mu,
S_tau`` in SI units, one row per limb per instant, LF line endings and
'.' decimals; lifted limbs report zero force and zero mu_c.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import yaml

from .force import ForcePlan, GaitInstant, SafetyFactors
from .posture import Posture

FORCE_REPORT_HEADER = (
    "round,instant,phase,limb,fx,fy,fz,tau1,tau2,tau3,mu_c,S_mu,S_tau"
)


@dataclass(frozen=True)
class InstantRecord:
    """Flat record of one solved gait instant."""

    index: int
    phase: str
    lifted: int | None
    contacts: tuple
    body_com: np.ndarray
    body_theta: np.ndarray
    toes: np.ndarray
    normals: np.ndarray
    forces: np.ndarray
    delta_wall: np.ndarray
    delta_com: np.ndarray
    torques: np.ndarray
    s_tau_inv: float
    s_mu: float
    s_tau: float
    commands: np.ndarray  # (6, 3) joint angles

    @classmethod
    def from_plan(cls, plan: ForcePlan, commands) -> "InstantRecord":
        instant = plan.instant
        return cls(
            index=instant.index,
            phase=instant.phase,
            lifted=instant.lifted,
            contacts=tuple(instant.contacts),
            body_com=instant.body.p_com,
            body_theta=instant.body.theta_b,
            toes=instant.toes,
            normals=instant.normals,
            forces=plan.forces,
            delta_wall=plan.delta_wall,
            delta_com=plan.delta_com,
            torques=plan.torques,
            s_tau_inv=plan.s_tau_inv,
            s_mu=plan.safety.s_mu,
            s_tau=plan.safety.s_tau,
            commands=np.vstack([q.as_array() for q in commands]),
        )


@dataclass(frozen=True)
class RoundRecord:
    posture: Posture
    instants: tuple
    safety: SafetyFactors  # worst over the round's instants


@dataclass(frozen=True)
class TrajectoryRecord:
    """One full plan: per-round postures with their 12 solved instants."""

    scenario_name: str
    mass: float
    g: float
    mu: float
    tau_max: float
    s_mu_floor: float
    force_weight: float
    limb_names: tuple
    start: Posture
    rounds: tuple

    @property
    def num_instants(self) -> int:
        return sum(len(r.instants) for r in self.rounds)


def _vec(a):
    return [float(v) for v in np.asarray(a).reshape(-1)]


def _mat(a):
    return [[float(v) for v in row] for row in np.asarray(a)]


def _posture_to_dict(p: Posture) -> dict:
    return {
        "round": int(p.round_index),
        "com": _vec(p.p_com),
        "theta": _vec(p.theta_b),
        "toes": _mat(p.toes),
        "regions": [int(r) for r in p.regions],
    }


def _posture_from_dict(d: dict) -> Posture:
    return Posture(
        round_index=int(d["round"]),
        p_com=np.asarray(d["com"], dtype=float),
        theta_b=np.asarray(d["theta"], dtype=float),
        toes=np.asarray(d["toes"], dtype=float),
        regions=tuple(int(r) for r in d["regions"]),
    )


def trajectory_to_dict(rec: TrajectoryRecord) -> dict:
    return {
        "format_version": 1,
        "units": "m",
        "scenario": rec.scenario_name,
        "physics": {
            "mass": float(rec.mass),
            "g": float(rec.g),
            "mu": float(rec.mu),
            "tau_max": float(rec.tau_max),
            "s_mu_floor": float(rec.s_mu_floor),
            "force_weight": float(rec.force_weight),
        },
        "limb_names": list(rec.limb_names),
        "start": _posture_to_dict(rec.start),
        "rounds": [
            {
                "posture": _posture_to_dict(r.posture),
                "safety": {"s_mu": float(r.safety.s_mu), "s_tau": float(r.safety.s_tau)},
                "instants": [
                    {
                        "index": int(it.index),
                        "phase": it.phase,
                        "lifted": None if it.lifted is None else int(it.lifted),
                        "contacts": [int(c) for c in it.contacts],
                        "body_com": _vec(it.body_com),
                        "body_theta": _vec(it.body_theta),
                        "toes": _mat(it.toes),
                        "normals": _mat(it.normals),
                        "forces": _mat(it.forces),
                        "delta_wall": _mat(it.delta_wall),
                        "delta_com": _vec(it.delta_com),
                        "torques": _mat(it.torques),
                        "s_tau_inv": float(it.s_tau_inv),
                        "s_mu": float(it.s_mu),
                        "s_tau": float(it.s_tau),
                        "commands": _mat(it.commands),
                    }
                    for it in r.instants
                ],
            }
            for r in rec.rounds
        ],
    }


def trajectory_from_dict(doc: dict) -> TrajectoryRecord:
    if doc.get("format_version") != 1:
        raise ValueError(f"unsupported trajectory format_version {doc.get('format_version')!r}")
    ph = doc["physics"]
    rounds = []
    for rd in doc["rounds"]:
        instants = tuple(
            InstantRecord(
                index=int(d["index"]),
                phase=d["phase"],
                lifted=None if d["lifted"] is None else int(d["lifted"]),
                contacts=tuple(int(c) for c in d["contacts"]),
                body_com=np.asarray(d["body_com"], dtype=float),
                body_theta=np.asarray(d["body_theta"], dtype=float),
                toes=np.asarray(d["toes"], dtype=float),
                normals=np.asarray(d["normals"], dtype=float),
                forces=np.asarray(d["forces"], dtype=float),
                delta_wall=np.asarray(d["delta_wall"], dtype=float),
                delta_com=np.asarray(d["delta_com"], dtype=float),
                torques=np.asarray(d["torques"], dtype=float),
                s_tau_inv=float(d["s_tau_inv"]),
                s_mu=float(d["s_mu"]),
                s_tau=float(d["s_tau"]),
                commands=np.asarray(d["commands"], dtype=float),
            )
            for d in rd["instants"]
        )
        sf = rd["safety"]
        rounds.append(
            RoundRecord(
                posture=_posture_from_dict(rd["posture"]),
                instants=instants,
                safety=SafetyFactors(s_mu=float(sf["s_mu"]), s_tau=float(sf["s_tau"])),
            )
        )
    return TrajectoryRecord(
        scenario_name=doc["scenario"],
        mass=float(ph["mass"]),
        g=float(ph["g"]),
        mu=float(ph["mu"]),
        tau_max=float(ph["tau_max"]),
        s_mu_floor=float(ph["s_mu_floor"]),
        force_weight=float(ph["force_weight"]),
        limb_names=tuple(doc["limb_names"]),
        start=_posture_from_dict(doc["start"]),
        rounds=tuple(rounds),
    )


def dump_trajectory(rec: TrajectoryRecord) -> str:
    return yaml.safe_dump(trajectory_to_dict(rec), sort_keys=True, default_flow_style=None)


def emit_trajectory(rec: TrajectoryRecord, path):
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(dump_trajectory(rec))
    except OSError as exc:
        raise OSError(f"cannot write trajectory to {path}: {exc}") from exc


def load_trajectory(path) -> TrajectoryRecord:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    return trajectory_from_dict(doc)


def _limb_safety(it: InstantRecord, i: int, mu: float, tau_max: float):
    """Per-limb critical friction and the limb's own safety factors."""
    n = it.normals[i]
    f = it.forces[i]
    normal = float(n @ f)
    tangential = float(np.linalg.norm(f - normal * n))
    if normal <= 1e-9:
        mu_c = 0.0 if tangential <= 1e-9 else np.inf
    else:
        mu_c = tangential / normal
    s_mu = np.inf if mu_c == 0.0 else mu / mu_c
    tau_c = float(np.abs(it.torques[i]).max())
    s_tau = np.inf if tau_c == 0.0 else tau_max / tau_c
    return mu_c, s_mu, s_tau


def emit_force_report(rec: TrajectoryRecord, path):
    """CSV rows per limb per instant, sufficient to replot the planned curves."""
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(FORCE_REPORT_HEADER.split(","))
            for rnd in rec.rounds:
                for it in rnd.instants:
                    for i, name in enumerate(rec.limb_names):
                        mu_c, s_mu, s_tau = _limb_safety(it, i, rec.mu, rec.tau_max)
                        writer.writerow(
                            [
                                rnd.posture.round_index,
                                it.index,
                                it.phase,
                                name,
                                *(repr(float(v)) for v in it.forces[i]),
                                *(repr(float(v)) for v in it.torques[i]),
                                repr(float(mu_c)),
                                repr(float(s_mu)),
                                repr(float(s_tau)),
                            ]
                        )
    except OSError as exc:
        raise OSError(f"cannot write force report to {path}: {exc}") from exc
