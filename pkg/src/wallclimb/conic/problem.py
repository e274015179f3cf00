"""Solver-agnostic convex problem container.

A ConicProblem carries a convex quadratic objective, linear equalities and
inequalities, variable box bounds, second-order-cone constraints, and an
optional set of binary variables. The continuous backend and the
branch-and-bound driver both consume this container; nothing in it is
specific to one solver.

Debug dump format (``ConicProblem.dump``): a line-oriented text listing,

    conic-problem v1
    vars <n> (continuous <nc>, binary <nb>)
    objective: 0.5 x'Px + q'x + c0 ; P nnz <..> ; q nnz <..> ; c0 <..>
    bounds: <index> in [lb, ub] ... (finite bounds only)
    eq <row>: <col>*<coef> ... == <rhs>
    ub <row>: <col>*<coef> ... <= <rhs>
    soc <k>: dim <d>; row0 is the cone scalar t, rows 1.. the vector part

Each constraint row lists only its nonzero columns.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from ..errors import InsufficientBigMWarning


@dataclass(frozen=True)
class SecondOrderCone:
    """Affine map into a second-order cone: y = F x + g, y[0] >= ||y[1:]||."""

    F: sp.csr_matrix
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "F", sp.csr_matrix(self.F))
        object.__setattr__(self, "g", np.asarray(self.g, dtype=float))
        if self.F.shape[0] != self.g.shape[0]:
            raise ValueError("cone map and offset dimensions disagree")
        if self.F.shape[0] < 2:
            raise ValueError("a second-order cone needs dimension >= 2")

    @property
    def dim(self) -> int:
        return self.F.shape[0]


@dataclass(frozen=True)
class SolveStats:
    """Backend diagnostics attached to every solve."""

    iterations: int = 0
    solve_time: float = 0.0
    kkt_primal: float = np.nan
    kkt_dual: float = np.nan
    kkt_gap: float = np.nan
    backend: str = ""
    nodes: int = 0
    best_bound: float = np.nan
    mip_gap: float = np.nan
    incumbent_history: tuple = ()


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a continuous or mixed-integer solve.

    ``status`` is one of 'optimal', 'infeasible', 'unbounded',
    'iteration_limit'. ``x`` is present iff an optimal (or incumbent,
    for iteration_limit) point exists.
    """

    status: str
    x: np.ndarray | None
    objective: float | None
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


@dataclass(frozen=True)
class ConicProblem:
    """Quadratic objective over linear rows, boxes, and second-order cones.

    Objective: 0.5 x' P x + q' x + c0, with P symmetric PSD (or None).
    Constraints: A_eq x == b_eq ; A_ub x <= b_ub ; lb <= x <= ub ;
    each cone in ``socs`` as documented on SecondOrderCone. ``binary``
    lists variable indices restricted to {0, 1}; their boxes must sit
    inside [0, 1].
    """

    num_vars: int
    P: sp.csr_matrix | None
    q: np.ndarray
    c0: float
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    A_ub: sp.csr_matrix
    b_ub: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    socs: tuple = ()
    binary: tuple = ()
    names: tuple = ()

    def __post_init__(self):
        n = self.num_vars
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "b_eq", np.asarray(self.b_eq, dtype=float))
        object.__setattr__(self, "b_ub", np.asarray(self.b_ub, dtype=float))
        object.__setattr__(self, "lb", np.asarray(self.lb, dtype=float))
        object.__setattr__(self, "ub", np.asarray(self.ub, dtype=float))
        object.__setattr__(self, "A_eq", sp.csr_matrix(self.A_eq))
        object.__setattr__(self, "A_ub", sp.csr_matrix(self.A_ub))
        object.__setattr__(self, "socs", tuple(self.socs))
        object.__setattr__(self, "binary", tuple(int(i) for i in self.binary))
        if self.P is not None:
            object.__setattr__(self, "P", sp.csr_matrix(self.P))
        self.validate()

    def validate(self):
        n = self.num_vars
        if self.q.shape != (n,) or self.lb.shape != (n,) or self.ub.shape != (n,):
            raise ValueError("objective/bound vectors must have length num_vars")
        if self.A_eq.shape[1] != n or self.A_ub.shape[1] != n:
            raise ValueError("constraint matrices must have num_vars columns")
        if self.A_eq.shape[0] != self.b_eq.shape[0] or self.A_ub.shape[0] != self.b_ub.shape[0]:
            raise ValueError("constraint rhs length mismatch")
        if np.any(self.ub < self.lb):
            raise ValueError("upper bounds must be >= lower bounds")
        for cone in self.socs:
            if cone.F.shape[1] != n:
                raise ValueError("cone map must have num_vars columns")
        for i in self.binary:
            if not 0 <= i < n:
                raise ValueError(f"binary index {i} out of range")
            if self.lb[i] < -1e-12 or self.ub[i] > 1.0 + 1e-12:
                raise ValueError(f"binary variable {i} must have bounds inside [0, 1]")
        if self.P is not None:
            if self.P.shape != (n, n):
                raise ValueError("P must be num_vars x num_vars")
            asym = abs(self.P - self.P.T)
            if asym.nnz and asym.max() > 1e-9 * max(abs(self.P).max(), 1.0):
                raise ValueError("P must be symmetric")
            if n <= 600:  # eigenvalue check is cheap at this scale
                w = np.linalg.eigvalsh(self.P.toarray())
                if w.min() < -1e-8 * max(w.max(), 1.0):
                    raise ValueError(f"P must be positive semidefinite (min eig {w.min():.3g})")

    @property
    def num_binary(self) -> int:
        return len(self.binary)

    @property
    def num_continuous(self) -> int:
        return self.num_vars - len(self.binary)

    def objective_value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        val = float(self.q @ x) + self.c0
        if self.P is not None:
            val += 0.5 * float(x @ (self.P @ x))
        return val

    def with_bounds(self, lb=None, ub=None) -> "ConicProblem":
        """Copy with replaced box bounds (used by branch-and-bound)."""
        return replace(
            self,
            lb=self.lb if lb is None else np.asarray(lb, dtype=float),
            ub=self.ub if ub is None else np.asarray(ub, dtype=float),
        )

    def fix_variables(self, assignment: dict) -> "ConicProblem":
        lb, ub = self.lb.copy(), self.ub.copy()
        for i, v in assignment.items():
            lb[i] = ub[i] = float(v)
        return self.with_bounds(lb, ub)

    def check_solution(self, x, tol: float = 1e-7) -> dict:
        """Max violation per constraint family; 'ok' if all within tol.

        Violations are relative to (1 + |rhs|) per row, so the same tol
        works across scales.
        """
        x = np.asarray(x, dtype=float)
        out = {}
        if self.b_eq.size:
            r = np.abs(self.A_eq @ x - self.b_eq) / (1.0 + np.abs(self.b_eq))
            out["eq"] = float(r.max())
        if self.b_ub.size:
            r = (self.A_ub @ x - self.b_ub) / (1.0 + np.abs(self.b_ub))
            out["ub"] = float(max(r.max(), 0.0))
        box = np.maximum(self.lb - x, x - self.ub) / (
            1.0 + np.maximum(np.abs(self.lb), np.abs(self.ub))
        )
        finite = np.isfinite(box)
        out["box"] = float(max(box[finite].max(), 0.0)) if finite.any() else 0.0
        worst_cone = 0.0
        for cone in self.socs:
            y = cone.F @ x + cone.g
            worst_cone = max(
                worst_cone, (np.linalg.norm(y[1:]) - y[0]) / (1.0 + abs(y[0]))
            )
        if self.socs:
            out["soc"] = float(max(worst_cone, 0.0))
        if self.binary:
            xb = x[list(self.binary)]
            out["integrality"] = float(np.abs(xb - np.round(xb)).max())
        out["ok"] = all(v <= tol for k, v in out.items() if k != "ok")
        return out

    def dump(self) -> str:
        """Self-describing text listing of the whole problem (debug aid)."""
        buf = io.StringIO()
        buf.write("conic-problem v1\n")
        buf.write(
            f"vars {self.num_vars} (continuous {self.num_continuous}, "
            f"binary {self.num_binary})\n"
        )
        pn = self.P.nnz if self.P is not None else 0
        buf.write(
            f"objective: 0.5 x'Px + q'x + c0 ; P nnz {pn} ; "
            f"q nnz {int(np.count_nonzero(self.q))} ; c0 {self.c0!r}\n"
        )
        if self.binary:
            buf.write("binary: " + " ".join(map(str, self.binary)) + "\n")
        for i in range(self.num_vars):
            if np.isfinite(self.lb[i]) or np.isfinite(self.ub[i]):
                name = self.names[i] if i < len(self.names) else str(i)
                buf.write(f"bound {name}: [{self.lb[i]!r}, {self.ub[i]!r}]\n")

        def write_rows(tag, A, b, op):
            A = A.tocsr()
            for r in range(A.shape[0]):
                cols = A.indices[A.indptr[r] : A.indptr[r + 1]]
                vals = A.data[A.indptr[r] : A.indptr[r + 1]]
                terms = " + ".join(f"{v!r}*x{c}" for c, v in zip(cols, vals))
                buf.write(f"{tag} {r}: {terms or '0'} {op} {b[r]!r}\n")

        write_rows("eq", self.A_eq, self.b_eq, "==")
        write_rows("ub", self.A_ub, self.b_ub, "<=")
        for k, cone in enumerate(self.socs):
            buf.write(f"soc {k}: dim {cone.dim}\n")
            write_rows(f"soc {k} row", cone.F, cone.g, "+")
        return buf.getvalue()


class ProblemBuilder:
    """Incremental assembly of a ConicProblem.

    Rows are accumulated as (columns, values) pairs and stitched into
    sparse matrices once at build(). Quadratic cost terms accumulate
    into P as 0.5 x'Px, i.e. add_quadratic(idx, W) contributes
    (x_idx)' W (x_idx) to the objective.
    """

    def __init__(self):
        self._n = 0
        self._names = []
        self._lb = []
        self._ub = []
        self._binary = []
        self._p_rows, self._p_cols, self._p_vals = [], [], []
        self._q = {}
        self._c0 = 0.0
        self._eq_rows, self._eq_rhs = [], []
        self._ub_rows, self._ub_rhs = [], []
        self._socs = []

    @property
    def num_vars(self) -> int:
        return self._n

    def add_variables(self, count, name, lb=-np.inf, ub=np.inf, binary=False):
        """Append ``count`` variables; returns their indices."""
        idx = np.arange(self._n, self._n + count)
        self._n += count
        lb = np.broadcast_to(np.asarray(lb, dtype=float), (count,))
        ub = np.broadcast_to(np.asarray(ub, dtype=float), (count,))
        self._lb.extend(lb)
        self._ub.extend(ub)
        if count == 1:
            self._names.append(name)
        else:
            self._names.extend(f"{name}[{k}]" for k in range(count))
        if binary:
            self._binary.extend(idx.tolist())
        return idx

    def set_bounds(self, idx, lb=None, ub=None):
        for i in np.atleast_1d(idx):
            if lb is not None:
                self._lb[int(i)] = float(lb)
            if ub is not None:
                self._ub[int(i)] = float(ub)

    def add_eq(self, cols, vals, rhs):
        self._eq_rows.append((np.atleast_1d(cols).astype(int), np.atleast_1d(vals).astype(float)))
        self._eq_rhs.append(float(rhs))

    def add_ub(self, cols, vals, rhs):
        self._ub_rows.append((np.atleast_1d(cols).astype(int), np.atleast_1d(vals).astype(float)))
        self._ub_rhs.append(float(rhs))

    def add_range(self, cols, vals, lower, upper):
        """lower <= coeffs . x <= upper as two inequality rows."""
        cols = np.atleast_1d(cols)
        vals = np.atleast_1d(vals)
        self.add_ub(cols, vals, upper)
        self.add_ub(cols, -vals, -lower)

    def add_soc(self, rows):
        """rows: list of (cols, vals, const); row 0 is the cone scalar."""
        r_idx, c_idx, data, g = [], [], [], []
        for k, (cols, vals, const) in enumerate(rows):
            cols = np.atleast_1d(cols).astype(int)
            vals = np.atleast_1d(vals).astype(float)
            r_idx.extend([k] * len(cols))
            c_idx.extend(cols.tolist())
            data.extend(vals.tolist())
            g.append(float(const))
        self._socs.append((len(rows), r_idx, c_idx, data, np.array(g)))

    def add_quadratic(self, idx, W):
        """Add (x_idx)' W (x_idx) to the objective (W symmetric PSD)."""
        idx = np.atleast_1d(idx).astype(int)
        W = np.atleast_2d(np.asarray(W, dtype=float))
        for a, ia in enumerate(idx):
            for b, ib in enumerate(idx):
                w = W[a, b]
                if w != 0.0:
                    self._p_rows.append(ia)
                    self._p_cols.append(ib)
                    self._p_vals.append(2.0 * w)  # objective carries 0.5 x'Px

    def add_cross_quadratic(self, idx_a, idx_b, W):
        """Add (x_a)' W (x_b) + (x_b)' W' (x_a) off-diagonal coupling."""
        idx_a = np.atleast_1d(idx_a).astype(int)
        idx_b = np.atleast_1d(idx_b).astype(int)
        W = np.atleast_2d(np.asarray(W, dtype=float))
        for a, ia in enumerate(idx_a):
            for b, ib in enumerate(idx_b):
                w = W[a, b]
                if w != 0.0:
                    self._p_rows.extend([ia, ib])
                    self._p_cols.extend([ib, ia])
                    self._p_vals.extend([2.0 * w, 2.0 * w])

    def add_linear(self, idx, vals):
        for i, v in zip(np.atleast_1d(idx), np.atleast_1d(vals)):
            self._q[int(i)] = self._q.get(int(i), 0.0) + float(v)

    def add_constant(self, c):
        self._c0 += float(c)

    def _stack(self, rows, rhs):
        r_idx, c_idx, data = [], [], []
        for r, (cols, vals) in enumerate(rows):
            r_idx.extend([r] * len(cols))
            c_idx.extend(cols.tolist())
            data.extend(vals.tolist())
        A = sp.csr_matrix(
            (data, (r_idx, c_idx)), shape=(len(rows), self._n)
        )
        return A, np.array(rhs, dtype=float)

    def build(self) -> ConicProblem:
        A_eq, b_eq = self._stack(self._eq_rows, self._eq_rhs)
        A_ub, b_ub = self._stack(self._ub_rows, self._ub_rhs)
        q = np.zeros(self._n)
        for i, v in self._q.items():
            q[i] = v
        P = None
        if self._p_vals:
            P = sp.csr_matrix(
                (self._p_vals, (self._p_rows, self._p_cols)), shape=(self._n, self._n)
            )
            P = 0.5 * (P + P.T)
        socs = []
        for dim, r_idx, c_idx, data, g in self._socs:
            F = sp.csr_matrix((data, (r_idx, c_idx)), shape=(dim, self._n))
            socs.append(SecondOrderCone(F=F, g=g))
        return ConicProblem(
            num_vars=self._n,
            P=P,
            q=q,
            c0=self._c0,
            A_eq=A_eq,
            b_eq=b_eq,
            A_ub=A_ub,
            b_ub=b_ub,
            lb=np.array(self._lb, dtype=float),
            ub=np.array(self._ub, dtype=float),
            socs=tuple(socs),
            binary=tuple(self._binary),
            names=tuple(self._names),
        )


def required_big_m(A, b, lb, ub) -> np.ndarray:
    """Per-row sup of A x - b over the box [lb, ub] (interval arithmetic)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    if not (np.all(np.isfinite(lb)) and np.all(np.isfinite(ub))):
        raise ValueError("big-M sizing needs finite variable boxes")
    sup = np.where(A > 0, A * ub, A * lb).sum(axis=1)
    return sup - b


def big_m_encode(indicator, A, b, M_big=None, *, lb=None, ub=None, var_cols=None):
    """Rows activating A x <= b only when the binary ``indicator`` is 1.

    Emits A x + M (H - 1) <= b, i.e. H=1 recovers the original rows and
    H=0 slackens each row by exactly its M. ``M_big`` may be a scalar or
    per-row vector; when omitted it is sized from the variable boxes
    (lb, ub over the columns in ``var_cols``). A too-small supplied M
    triggers InsufficientBigMWarning when the boxes allow checking.

    Returns a list of (cols, vals, rhs) row triples over the full
    variable vector, suitable for ProblemBuilder.add_ub.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if var_cols is None:
        var_cols = np.arange(A.shape[1])
    var_cols = np.asarray(var_cols, dtype=int)

    needed = None
    if lb is not None and ub is not None:
        lb = np.asarray(lb, dtype=float)
        ub = np.asarray(ub, dtype=float)
        if lb.shape[0] != A.shape[1]:  # boxes over the full vector
            lb = lb[var_cols]
            ub = ub[var_cols]
        needed = np.maximum(required_big_m(A, b, lb, ub), 0.0)
    if M_big is None:
        if needed is None:
            raise ValueError("either M_big or variable boxes must be supplied")
        M = needed
    else:
        M = np.broadcast_to(np.asarray(M_big, dtype=float), b.shape).copy()
        if needed is not None and np.any(M < needed - 1e-12):
            warnings.warn(
                f"big-M {M.max():.4g} smaller than box-implied requirement "
                f"{needed.max():.4g}; indicator=0 may still constrain",
                InsufficientBigMWarning,
            )

    rows = []
    for r in range(A.shape[0]):
        nz = np.nonzero(A[r])[0]
        cols = np.concatenate([var_cols[nz], [indicator]])
        vals = np.concatenate([A[r, nz], [M[r]]])
        rows.append((cols, vals, float(b[r] + M[r])))
    return rows
