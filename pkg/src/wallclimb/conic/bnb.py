"""Best-first branch-and-bound over the continuous conic backend.

Search policy (fixed for reproducibility): best-first on the parent
relaxation bound, branching on the most-fractional free binary with
lowest-index tie-break. A rounding dive provides early incumbents; it
never affects node ordering, so the search is deterministic. Incumbent
objectives are recorded and are non-increasing by construction.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field as dc_field

import numpy as np

from ..errors import SolverNumericalError
from .backend import solve_continuous
from .problem import ConicProblem, SolveResult, SolveStats

DEFAULT_GAP_TOL = 1e-6
INT_TOL = 1e-6


@dataclass(order=True)
class _Node:
    # heap ordering uses (bound, counter) only; counter breaks ties FIFO
    bound: float
    counter: int
    lb: np.ndarray = dc_field(compare=False, default=None)
    ub: np.ndarray = dc_field(compare=False, default=None)


def _binaries_in_quadratic_or_cones(problem: ConicProblem) -> bool:
    if not problem.binary:
        return False
    cols = np.array(problem.binary)
    if problem.P is not None:
        if problem.P.tocsc()[:, cols].nnz:
            return True
    for cone in problem.socs:
        if cone.F.tocsc()[:, cols].nnz:
            return True
    return False


def solve_micp(
    problem: ConicProblem,
    gap_tol: float = DEFAULT_GAP_TOL,
    int_tol: float = INT_TOL,
    max_nodes: int = 200_000,
    heuristic: bool = True,
    purify=None,
    solve=solve_continuous,
) -> SolveResult:
    """Globally solve a ConicProblem whose binaries enter linearly.

    Returns 'optimal' with relative optimality gap <= gap_tol,
    'infeasible' when no binary assignment admits a feasible relaxation,
    'unbounded' when the root relaxation is unbounded, or
    'iteration_limit' (carrying the incumbent if any) when max_nodes is
    exhausted.

    ``purify`` is an optional crossover hook ``purify(x, lb, ub) -> x'``
    returning a point with the same continuous block and the same
    objective in which every binary group that admits an equally good
    integral choice is snapped to it; undecidable binaries keep their
    relaxed values. Interior-point relaxations return the analytic
    center of the optimal face, so binaries that do not enter the
    objective come back fractional even when an integral choice exists;
    without the hook, fractionality-based branching would chase that
    drift instead of the genuinely contested binaries. Fully integral
    purified points are accepted as incumbents only after passing the
    problem's own feasibility check.
    """
    if not problem.binary:
        return solve(problem)
    if _binaries_in_quadratic_or_cones(problem):
        raise ValueError("binary variables must enter only linear rows (big-M structure)")

    bin_idx = np.array(problem.binary, dtype=int)
    incumbent_x = None
    incumbent_obj = np.inf
    history = []
    nodes_done = 0
    counter = 0
    tried_roundings = set()

    def relax(lb, ub) -> SolveResult:
        return solve(problem.with_bounds(lb, ub))

    def try_rounding(x, lb, ub):
        """Fix binaries to the rounded relaxation values and re-solve."""
        nonlocal incumbent_x, incumbent_obj
        rounded = np.round(x[bin_idx]).astype(float)
        rounded = np.clip(rounded, lb[bin_idx], ub[bin_idx])
        key = tuple(rounded.astype(int))
        if key in tried_roundings:
            return
        tried_roundings.add(key)
        flb, fub = lb.copy(), ub.copy()
        flb[bin_idx] = rounded
        fub[bin_idx] = rounded
        try:
            res = relax(flb, fub)
        except SolverNumericalError:
            return
        if res.is_optimal and res.objective < incumbent_obj - 1e-12:
            incumbent_obj = res.objective
            incumbent_x = res.x.copy()
            history.append((nodes_done, incumbent_obj))

    root = _Node(bound=-np.inf, counter=counter, lb=problem.lb.copy(), ub=problem.ub.copy())
    heap = [root]

    while heap:
        node = heapq.heappop(heap)
        if nodes_done >= max_nodes:
            break
        slack = gap_tol * max(1.0, abs(incumbent_obj))
        if node.bound >= incumbent_obj - slack:
            # best-first: every remaining node is at least this bound
            break
        res = relax(node.lb, node.ub)
        nodes_done += 1

        if res.status == "infeasible":
            continue
        if res.status == "unbounded":
            if nodes_done == 1:
                return SolveResult(
                    status="unbounded",
                    x=None,
                    objective=None,
                    stats=SolveStats(backend="bnb", nodes=nodes_done),
                )
            continue  # bounded ancestors exist; treat as numerically unusable
        if res.status == "iteration_limit":
            raise SolverNumericalError("node relaxation hit the backend iteration limit")

        bound = res.objective
        if bound >= incumbent_obj - gap_tol * max(1.0, abs(incumbent_obj)):
            continue

        x = res.x
        if purify is not None:
            x_clean = np.asarray(purify(x, node.lb, node.ub), dtype=float)
        else:
            x_clean = x
        frac = np.abs(x_clean[bin_idx] - np.round(x_clean[bin_idx]))
        free = node.ub[bin_idx] - node.lb[bin_idx] > 0.5
        if not np.any(frac > int_tol):
            candidate = x_clean if x_clean is not x else x
            if purify is None or problem.check_solution(candidate, tol=1e-6)["ok"]:
                if bound < incumbent_obj - 1e-12:
                    incumbent_obj = bound
                    incumbent_x = candidate.copy()
                    history.append((nodes_done, incumbent_obj))
                continue

        if not np.any(free):
            continue  # fully fixed node that failed the integral check: numerics

        if heuristic:
            try_rounding(x_clean, node.lb, node.ub)

        # most-fractional free binary, lowest index on ties
        score = np.where(free, 0.5 - np.abs(x_clean[bin_idx] - 0.5), -np.inf)
        if score.max() <= int_tol:  # purified point integral yet unusable
            score = np.where(free, 0.5 - np.abs(x[bin_idx] - 0.5), -np.inf)
        pick = int(bin_idx[int(np.argmax(score))])
        for fixed_val in (0.0, 1.0):
            lb2, ub2 = node.lb.copy(), node.ub.copy()
            lb2[pick] = fixed_val
            ub2[pick] = fixed_val
            counter += 1
            heapq.heappush(heap, _Node(bound=bound, counter=counter, lb=lb2, ub=ub2))

    best_open = min((n.bound for n in heap), default=np.inf)
    if incumbent_x is None:
        if heap:  # stopped early with work left and nothing found
            return SolveResult(
                status="iteration_limit",
                x=None,
                objective=None,
                stats=SolveStats(backend="bnb", nodes=nodes_done, best_bound=best_open),
            )
        return SolveResult(
            status="infeasible",
            x=None,
            objective=None,
            stats=SolveStats(backend="bnb", nodes=nodes_done),
        )

    gap = max(0.0, (incumbent_obj - best_open) / max(1.0, abs(incumbent_obj)))
    x_final = incumbent_x.copy()
    x_final[bin_idx] = np.round(x_final[bin_idx])
    status = "optimal"
    if heap and nodes_done >= max_nodes and gap > gap_tol:
        status = "iteration_limit"
    return SolveResult(
        status=status,
        x=x_final,
        objective=incumbent_obj,
        stats=SolveStats(
            backend="bnb",
            nodes=nodes_done,
            best_bound=float(min(best_open, incumbent_obj)),
            mip_gap=float(gap if heap else 0.0),
            incumbent_history=tuple(history),
        ),
    )
