"""Continuous conic solves via the Clarabel interior-point backend.

The contract is backend-agnostic: solve_continuous takes a ConicProblem
and returns a SolveResult whose KKT residuals (primal feasibility, dual
stationarity, complementarity) are verified here, independent of what
the backend reports. Numerical failures raise; they are never clamped
into a fake 'optimal'.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

import clarabel

from ..errors import SolverNumericalError
from .problem import ConicProblem, SolveResult, SolveStats

KKT_TOL = 1e-7

_STATUS_MAP = {
    "Solved": "optimal",
    "AlmostSolved": "optimal",
    "PrimalInfeasible": "infeasible",
    "AlmostPrimalInfeasible": "infeasible",
    "DualInfeasible": "unbounded",
    "AlmostDualInfeasible": "unbounded",
    "MaxIterations": "iteration_limit",
    "MaxTime": "iteration_limit",
}


def _default_settings() -> "clarabel.DefaultSettings":
    s = clarabel.DefaultSettings()
    s.verbose = False
    s.tol_gap_abs = 1e-10
    s.tol_gap_rel = 1e-10
    s.tol_feas = 1e-10
    s.max_iter = 200
    return s


def _assemble(problem: ConicProblem):
    """Stack the problem into Clarabel's A x + s = b, s in K form."""
    blocks = []
    rhs = []
    cones = []

    m_eq = problem.A_eq.shape[0]
    if m_eq:
        blocks.append(problem.A_eq)
        rhs.append(problem.b_eq)
        cones.append(clarabel.ZeroConeT(m_eq))

    nonneg_blocks = []
    nonneg_rhs = []
    if problem.A_ub.shape[0]:
        nonneg_blocks.append(problem.A_ub)
        nonneg_rhs.append(problem.b_ub)
    fin_ub = np.where(np.isfinite(problem.ub))[0]
    if fin_ub.size:
        rows = sp.csr_matrix(
            (np.ones(fin_ub.size), (np.arange(fin_ub.size), fin_ub)),
            shape=(fin_ub.size, problem.num_vars),
        )
        nonneg_blocks.append(rows)
        nonneg_rhs.append(problem.ub[fin_ub])
    fin_lb = np.where(np.isfinite(problem.lb))[0]
    if fin_lb.size:
        rows = sp.csr_matrix(
            (-np.ones(fin_lb.size), (np.arange(fin_lb.size), fin_lb)),
            shape=(fin_lb.size, problem.num_vars),
        )
        nonneg_blocks.append(rows)
        nonneg_rhs.append(-problem.lb[fin_lb])
    if nonneg_blocks:
        stacked = sp.vstack(nonneg_blocks)
        blocks.append(stacked)
        rhs.append(np.concatenate(nonneg_rhs))
        cones.append(clarabel.NonnegativeConeT(stacked.shape[0]))

    for cone in problem.socs:
        blocks.append(-cone.F)  # s = b - Ax = Fx + g must land in the cone
        rhs.append(cone.g)
        cones.append(clarabel.SecondOrderConeT(cone.dim))

    if blocks:
        A = sp.vstack(blocks).tocsc()
        b = np.concatenate(rhs)
    else:
        A = sp.csc_matrix((0, problem.num_vars))
        b = np.zeros(0)
    P = (
        sp.csc_matrix((problem.num_vars, problem.num_vars))
        if problem.P is None
        else sp.csc_matrix(problem.P)
    )
    return P, A, b, cones


def _kkt_residuals(problem: ConicProblem, A, b, x, z, s):
    q = problem.q
    prim = float(np.abs(A @ x + s - b).max()) if b.size else 0.0
    prim /= 1.0 + (float(np.abs(b).max()) if b.size else 0.0)
    Px = problem.P @ x if problem.P is not None else np.zeros_like(x)
    stat = Px + q + (A.T @ z if b.size else 0.0)
    dual = float(np.abs(stat).max()) / (1.0 + float(np.abs(q).max()) + float(np.abs(Px).max()))
    # complementarity relative to the objective term magnitudes (the final
    # objective value can cancel to ~0 while the terms are large)
    obj_scale = 1.0 + 0.5 * abs(float(x @ Px)) + abs(float(q @ x)) + abs(problem.c0)
    gap = float(abs(s @ z)) / obj_scale if b.size else 0.0
    return prim, dual, gap


def solve_continuous(
    problem: ConicProblem,
    settings: "clarabel.DefaultSettings | None" = None,
    kkt_tol: float = KKT_TOL,
) -> SolveResult:
    """Solve a ConicProblem with an empty (or ignored) binary set.

    Returns status optimal/infeasible/unbounded/iteration_limit. On
    'optimal' the verified KKT residuals must be within ``kkt_tol``;
    otherwise a SolverNumericalError is raised.
    """
    P, A, b, cones = _assemble(problem)
    solver = clarabel.DefaultSolver(
        P, problem.q, A, b, cones, settings or _default_settings()
    )
    sol = solver.solve()
    raw = str(sol.status)
    status = _STATUS_MAP.get(raw)
    if status is None:
        raise SolverNumericalError(f"backend returned status {raw}")

    if status in ("infeasible", "unbounded"):
        return SolveResult(
            status=status,
            x=None,
            objective=None,
            stats=SolveStats(
                iterations=sol.iterations, solve_time=sol.solve_time, backend="clarabel"
            ),
        )

    x = np.asarray(sol.x, dtype=float)
    z = np.asarray(sol.z, dtype=float)
    s = np.asarray(sol.s, dtype=float)
    prim, dual, gap = _kkt_residuals(problem, A, b, x, z, s)
    stats = SolveStats(
        iterations=sol.iterations,
        solve_time=sol.solve_time,
        kkt_primal=prim,
        kkt_dual=dual,
        kkt_gap=gap,
        backend="clarabel",
    )
    objective = problem.objective_value(x)

    if status == "optimal":
        if max(prim, dual, gap) > kkt_tol:
            raise SolverNumericalError(
                f"KKT residuals (primal {prim:.3g}, dual {dual:.3g}, gap {gap:.3g}) "
                f"exceed {kkt_tol:.1g} despite status {raw}"
            )
        return SolveResult(status="optimal", x=x, objective=objective, stats=stats)

    # iteration_limit: hand back the best iterate without vouching for it
    return SolveResult(status="iteration_limit", x=x, objective=objective, stats=stats)
