"""Standard-form linear programs: containers, validation, and solution checks.

A problem is ``minimize c.x`` subject to ``rl <= A x <= ru`` and
``l <= x <= u``, with A held in row/column/value triplet form. Any bound
may be infinite; a row with equal bounds is an equality. Solvers plug in
behind :func:`solve`; the built-in reference solver lives in
:mod:`heatplan.simplex`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
import scipy.sparse as sp


class LpError(Exception):
    """Base class for LP-layer failures."""


class MalformedProblem(LpError):
    """The problem violates a structural invariant; caller bug, not a model outcome."""


class DimensionMismatch(LpError):
    """Vectors passed to a check do not agree with the problem dimensions."""


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and iteration controls for the reference solver.

    tol_feas bounds primal infeasibility of a reported Optimal point,
    tol_opt is the dual-feasibility (reduced cost) tolerance, tol_gap the
    relative duality-gap tolerance used by solution checks.
    """

    tol_feas: float = 1e-7
    tol_opt: float = 1e-9
    tol_gap: float = 1e-6
    max_iterations: int = 200_000
    # consecutive degenerate pivots before switching to Bland's rule
    stall_threshold: int = 60
    refactor_every: int = 500
    scale: bool = True


@dataclass(frozen=True)
class LpProblem:
    """Immutable LP instance in triplet form.

    ``a_rows/a_cols/a_vals`` hold the nonzeros of A in row-major order.
    ``variable_names`` and ``row_names`` are diagnostic identifiers; they
    also drive the MPS export and audit reports.
    """

    objective: np.ndarray
    a_rows: np.ndarray
    a_cols: np.ndarray
    a_vals: np.ndarray
    row_lower: np.ndarray
    row_upper: np.ndarray
    var_lower: np.ndarray
    var_upper: np.ndarray
    variable_names: tuple[str, ...] = ()
    row_names: tuple[str, ...] = ()

    def __post_init__(self):
        conv = lambda a, dt: np.ascontiguousarray(np.asarray(a, dtype=dt))
        object.__setattr__(self, "objective", conv(self.objective, np.float64))
        object.__setattr__(self, "a_rows", conv(self.a_rows, np.int64))
        object.__setattr__(self, "a_cols", conv(self.a_cols, np.int64))
        object.__setattr__(self, "a_vals", conv(self.a_vals, np.float64))
        for name in ("row_lower", "row_upper", "var_lower", "var_upper"):
            object.__setattr__(self, name, conv(getattr(self, name), np.float64))
        if not self.variable_names:
            object.__setattr__(
                self, "variable_names", tuple(f"x{j}" for j in range(self.num_variables))
            )
        if not self.row_names:
            object.__setattr__(
                self, "row_names", tuple(f"r{i}" for i in range(self.num_rows))
            )
        for arr in (self.objective, self.a_rows, self.a_cols, self.a_vals,
                    self.row_lower, self.row_upper, self.var_lower, self.var_upper):
            arr.setflags(write=False)

    @property
    def num_variables(self) -> int:
        return self.objective.shape[0]

    @property
    def num_rows(self) -> int:
        return self.row_lower.shape[0]

    @property
    def num_nonzeros(self) -> int:
        return self.a_vals.shape[0]

    def validate(self) -> None:
        """Raise MalformedProblem on any invariant violation."""
        n, m = self.num_variables, self.num_rows
        if self.row_upper.shape != (m,):
            raise MalformedProblem("row bound vectors disagree in length")
        if self.var_lower.shape != (n,) or self.var_upper.shape != (n,):
            raise MalformedProblem("variable bound vectors disagree in length")
        if len(self.variable_names) != n or len(self.row_names) != m:
            raise MalformedProblem("name lists disagree with problem dimensions")
        if not (self.a_rows.shape == self.a_cols.shape == self.a_vals.shape):
            raise MalformedProblem("triplet arrays disagree in length")
        if self.num_nonzeros:
            if self.a_rows.min() < 0 or self.a_rows.max() >= m:
                raise MalformedProblem("triplet row index out of range")
            if self.a_cols.min() < 0 or self.a_cols.max() >= n:
                raise MalformedProblem("triplet column index out of range")
        for label, arr in (("objective", self.objective), ("matrix", self.a_vals)):
            if np.isnan(arr).any():
                raise MalformedProblem(f"NaN in {label} coefficients")
        for label, lo, up in (
            ("row", self.row_lower, self.row_upper),
            ("variable", self.var_lower, self.var_upper),
        ):
            if np.isnan(lo).any() or np.isnan(up).any():
                raise MalformedProblem(f"NaN in {label} bounds")
            bad = np.nonzero(lo > up)[0]
            if bad.size:
                raise MalformedProblem(f"{label} bound pair {bad[0]} has lower > upper")

    def matrix_csc(self) -> sp.csc_matrix:
        return sp.csc_matrix(
            (self.a_vals, (self.a_rows, self.a_cols)),
            shape=(self.num_rows, self.num_variables),
        )

    def matrix_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.a_vals, (self.a_rows, self.a_cols)),
            shape=(self.num_rows, self.num_variables),
        )

    @staticmethod
    def from_dense(
        c,
        a,
        row_lower,
        row_upper,
        var_lower,
        var_upper,
        variable_names=(),
        row_names=(),
    ) -> "LpProblem":
        """Convenience constructor from a dense matrix (tests, toy models)."""
        a = np.asarray(a, dtype=np.float64)
        rows, cols = np.nonzero(a)
        order = np.lexsort((cols, rows))
        return LpProblem(
            objective=c,
            a_rows=rows[order],
            a_cols=cols[order],
            a_vals=a[rows[order], cols[order]],
            row_lower=row_lower,
            row_upper=row_upper,
            var_lower=var_lower,
            var_upper=var_upper,
            variable_names=tuple(variable_names),
            row_names=tuple(row_names),
        )


@dataclass(frozen=True)
class LpSolution:
    status: Status
    primal: np.ndarray
    duals: np.ndarray
    objective_value: float
    iterations: int

    @property
    def is_optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass(frozen=True)
class ResidualReport:
    """Exact-arithmetic residuals of a candidate solution."""

    max_row_residual: float
    max_bound_violation: float
    duality_gap: float

    def within(self, tol: float) -> bool:
        return max(self.max_row_residual, self.max_bound_violation) <= tol


def check_solution(problem: LpProblem, solution: LpSolution, tol: float = 1e-7) -> ResidualReport:
    """Recompute feasibility and optimality residuals from first principles.

    Pure function of its inputs; never consults solver internals, so it
    doubles as an independent closed-loop check on any solver behind the
    interface.
    """
    x = np.asarray(solution.primal, dtype=np.float64)
    y = np.asarray(solution.duals, dtype=np.float64)
    if x.shape != (problem.num_variables,):
        raise DimensionMismatch(
            f"primal has length {x.shape}, problem has {problem.num_variables} variables"
        )
    if y.shape != (problem.num_rows,):
        raise DimensionMismatch(
            f"duals have length {y.shape}, problem has {problem.num_rows} rows"
        )
    activity = problem.matrix_csr() @ x if problem.num_rows else np.zeros(0)
    row_resid = 0.0
    if problem.num_rows:
        below = np.maximum(problem.row_lower - activity, 0.0)
        above = np.maximum(activity - problem.row_upper, 0.0)
        row_resid = float(np.maximum(below, above).max())
    below_v = np.maximum(problem.var_lower - x, 0.0)
    above_v = np.maximum(x - problem.var_upper, 0.0)
    bound_viol = float(np.maximum(below_v, above_v).max()) if x.size else 0.0

    cx = float(problem.objective @ x)
    gap = abs(cx - dual_objective(problem, y))
    return ResidualReport(row_resid, bound_viol, gap)


def dual_objective(problem: LpProblem, y: np.ndarray,
                   zero_tol: float | None = None) -> float:
    """Value of the bound-form dual at multipliers y.

    Row multipliers pair with the row bound their sign selects; reduced
    costs pair with variable bounds the same way. A multiplier whose sign
    selects an infinite bound makes the dual value -inf (y is then not
    dual feasible). Multipliers within zero_tol of zero are treated as
    exact zeros so float noise cannot flip a term to -inf; the default
    tolerance scales with the cost magnitudes the noise comes from.
    """
    y = np.asarray(y, dtype=np.float64)
    z = problem.objective - (problem.matrix_csc().T @ y)
    if zero_tol is None:
        cmax = float(np.abs(problem.objective).max()) if problem.num_variables else 0.0
        zero_tol = 1e-9 * (1.0 + cmax)
    total = 0.0
    for mult, lo, up in (
        (y, problem.row_lower, problem.row_upper),
        (z, problem.var_lower, problem.var_upper),
    ):
        pos = mult > zero_tol
        neg = mult < -zero_tol
        picked = np.where(pos, lo, np.where(neg, up, 0.0))
        terms = np.where(pos | neg, mult * picked, 0.0)
        if np.isnan(terms).any():  # 0 * inf from an inactive infinite bound
            terms = np.nan_to_num(terms, nan=-np.inf)
        total += float(terms.sum())
    return total


def violated_rows(problem: LpProblem, x: np.ndarray, tol: float) -> list[tuple[str, float]]:
    """Rows whose activity at x violates its bounds by more than tol, worst first."""
    if problem.num_rows == 0:
        return []
    activity = problem.matrix_csr() @ np.asarray(x, dtype=np.float64)
    below = np.maximum(problem.row_lower - activity, 0.0)
    above = np.maximum(activity - problem.row_upper, 0.0)
    viol = np.maximum(below, above)
    idx = np.nonzero(viol > tol)[0]
    ranked = sorted(idx, key=lambda i: -viol[i])
    return [(problem.row_names[i], float(viol[i])) for i in ranked]


SolverFn = Callable[[LpProblem, SolverOptions], LpSolution]


def solve(problem: LpProblem, options: SolverOptions | None = None,
          solver: SolverFn | None = None) -> LpSolution:
    """Solve with the given backend (reference simplex by default).

    The problem is validated first; invariant violations raise
    MalformedProblem rather than being reported as Infeasible.
    """
    from . import simplex

    problem.validate()
    opts = options or SolverOptions()
    backend = solver or simplex.solve_revised_simplex
    return backend(problem, opts)
