"""Whole-body compliance model for a position-controlled multi-limbed robot.

Limb compliance is modeled as springs at the P-controlled joints (virtual
joint method), giving a toe-space stiffness K = (J k^-1 J^T)^-1 per limb.
Contacting limbs assemble into a 6x6 body stiffness matrix that relates
the torso sag-down to the external load and the wall-imposed toe
deflections; contact forces then follow from the per-limb deflections.

Sign convention: f_i is the force the wall exerts on the toe, so static
balance reads sum(f_i) + F_tot = 0 and sum(P_i f_i) + M_tot = 0. All
quantities are world-frame; moments are taken about the body COM, so the
cross matrices P_i are built from toe positions relative to the COM.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NearSingularConfigurationError, RankDeficientContactError
from .kinematics import skew

DEFAULT_SERVO_STIFFNESS = 300.0  # N*m/rad per joint
DEFAULT_MASS = 10.3  # kg
GRAVITY = 9.81  # m/s^2


@dataclass(frozen=True)
class ServoStiffness:
    """Diagonal joint spring coefficients of one limb (N*m/rad)."""

    k: np.ndarray = field(
        default_factory=lambda: np.full(3, DEFAULT_SERVO_STIFFNESS)
    )

    def __post_init__(self):
        object.__setattr__(self, "k", np.asarray(self.k, dtype=float))
        if np.any(self.k <= 0.0):
            raise ValueError("servo spring coefficients must be strictly positive")


@dataclass(frozen=True)
class ExternalLoad:
    """Resultant force and moment about the body COM (world frame)."""

    F_tot: np.ndarray
    M_tot: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "F_tot", np.asarray(self.F_tot, dtype=float))
        object.__setattr__(self, "M_tot", np.asarray(self.M_tot, dtype=float))

    @classmethod
    def gravity(cls, mass: float = DEFAULT_MASS, g: float = GRAVITY) -> "ExternalLoad":
        return cls(F_tot=np.array([0.0, 0.0, -mass * g]), M_tot=np.zeros(3))

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.F_tot, self.M_tot])


@dataclass(frozen=True)
class DeflectionState:
    """Torso sag-down (6-vector) and per-contact wall-imposed deflections."""

    delta_com: np.ndarray
    delta_wall: tuple

    def __post_init__(self):
        object.__setattr__(self, "delta_com", np.asarray(self.delta_com, dtype=float))
        object.__setattr__(
            self, "delta_wall", tuple(np.asarray(d, dtype=float) for d in self.delta_wall)
        )


def limb_stiffness(J: np.ndarray, k, cond_threshold: float = 1e8) -> np.ndarray:
    """Toe-space stiffness K = (J diag(k)^-1 J^T)^-1 of one limb.

    Raises NearSingularConfigurationError (carrying the condition number)
    when the Jacobian is too ill-conditioned to invert safely.
    """
    J = np.asarray(J, dtype=float)
    if isinstance(k, ServoStiffness):
        k = k.k
    k = np.asarray(k, dtype=float)
    cond = np.linalg.cond(J)
    if not np.isfinite(cond) or cond > cond_threshold:
        raise NearSingularConfigurationError(
            f"limb Jacobian condition number {cond:.3g} exceeds {cond_threshold:.3g}",
            condition_number=cond,
        )
    compliance = J @ np.diag(1.0 / k) @ J.T
    K = np.linalg.inv(compliance)
    return 0.5 * (K + K.T)  # kill round-off asymmetry


def toe_cross_matrix(toe) -> np.ndarray:
    """Anti-symmetric matrix P of a toe position; P @ u == toe x u."""
    return skew(toe)


@dataclass(frozen=True)
class LimbCompliance:
    """One limb's stiffness and cross matrix, plus whether it is on a wall."""

    K: np.ndarray
    P: np.ndarray
    in_contact: bool = True


@dataclass(frozen=True)
class ComplianceModel:
    """Per-limb compliance entries and the assembled 6x6 body matrix."""

    limbs: tuple
    A: np.ndarray

    @classmethod
    def from_contacts(cls, limbs) -> "ComplianceModel":
        limbs = tuple(limbs)
        contacts = [(lc.K, lc.P) for lc in limbs if lc.in_contact]
        return cls(limbs=limbs, A=assemble_whole_body(contacts))

    @property
    def contacting(self) -> tuple:
        return tuple(lc for lc in self.limbs if lc.in_contact)


def assemble_whole_body(contacts) -> np.ndarray:
    """Sum the 6x6 block contributions of the contacting limbs.

    Each contact contributes [[K, K P^T], [P K, P K P^T]].
    """
    contacts = list(contacts)
    if not contacts:
        raise ValueError("at least one contact is required")
    A = np.zeros((6, 6))
    for K, P in contacts:
        K = np.asarray(K, dtype=float)
        P = np.asarray(P, dtype=float)
        A[:3, :3] += K
        A[:3, 3:] += K @ P.T
        A[3:, :3] += P @ K
        A[3:, 3:] += P @ K @ P.T
    return A


def sagdown_rhs(load: ExternalLoad, contacts, delta_wall) -> np.ndarray:
    """Right-hand side [F; M] + sum([K_i; P_i K_i] delta_i_wall)."""
    rhs = load.stacked().copy()
    for (K, P), dw in zip(contacts, delta_wall):
        Kd = np.asarray(K, dtype=float) @ np.asarray(dw, dtype=float)
        rhs[:3] += Kd
        rhs[3:] += np.asarray(P, dtype=float) @ Kd
    return rhs


def solve_sagdown(
    A: np.ndarray,
    load: ExternalLoad,
    contacts,
    delta_wall,
    rank_tol: float = 1e-10,
) -> np.ndarray:
    """Torso sag-down solving A delta_com = [F; M] + sum([K; P K] delta_wall).

    A is symmetric positive semidefinite. When the contact set leaves
    unresisted directions (fewer than 3 non-collinear contacts), the
    system is solved in the minimum-norm sense provided the load is
    consistent; an inconsistent load raises RankDeficientContactError.
    """
    contacts = list(contacts)
    A = np.asarray(A, dtype=float)
    rhs = sagdown_rhs(load, contacts, delta_wall)

    eigvals, eigvecs = np.linalg.eigh(0.5 * (A + A.T))
    scale = max(eigvals.max(), 0.0)
    keep = eigvals > rank_tol * max(scale, 1.0)
    if not np.any(keep):
        raise RankDeficientContactError("contact stiffness matrix is zero")

    coeffs = eigvecs.T @ rhs
    dropped = coeffs[~keep]
    rhs_scale = max(np.linalg.norm(rhs), 1.0)
    if dropped.size and np.linalg.norm(dropped) > 1e-9 * rhs_scale:
        raise RankDeficientContactError(
            "load has a component along an unresisted contact-set direction "
            f"(residual {np.linalg.norm(dropped):.3g})"
        )
    delta_com = eigvecs[:, keep] @ (coeffs[keep] / eigvals[keep])

    residual = A @ delta_com - rhs
    if np.linalg.norm(residual) > 1e-10 * rhs_scale:
        raise RankDeficientContactError(
            f"sag-down solve residual {np.linalg.norm(residual):.3g} too large"
        )
    return delta_com


def contact_forces(contacts, delta_wall, delta_com) -> list:
    """Per-contact toe force f_i = K_i (delta_i_wall - [I P_i^T] delta_com)."""
    delta_com = np.asarray(delta_com, dtype=float)
    dd, dtheta = delta_com[:3], delta_com[3:]
    forces = []
    for (K, P), dw in zip(contacts, delta_wall):
        K = np.asarray(K, dtype=float)
        P = np.asarray(P, dtype=float)
        forces.append(K @ (np.asarray(dw, dtype=float) - dd - P.T @ dtheta))
    return forces


def joint_torques(J: np.ndarray, f) -> np.ndarray:
    """Static joint torques tau = J^T f for one limb."""
    return np.asarray(J, dtype=float).T @ np.asarray(f, dtype=float)


def equilibrium_residual(contacts, forces, load: ExternalLoad) -> float:
    """Max norm of the force/moment balance defect, relative to the load."""
    f_sum = np.zeros(3)
    m_sum = np.zeros(3)
    for (K, P), f in zip(contacts, forces):
        f = np.asarray(f, dtype=float)
        f_sum += f
        m_sum += np.asarray(P, dtype=float) @ f
    scale = max(np.linalg.norm(load.stacked()), 1.0)
    return float(
        max(
            np.linalg.norm(f_sum + load.F_tot),
            np.linalg.norm(m_sum + load.M_tot),
        )
        / scale
    )
