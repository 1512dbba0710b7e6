"""Reference LP solver: bounded-variable revised simplex.

Design notes
------------
The problem ``min c.x, rl <= Ax <= ru, l <= x <= u`` is solved on an
extended system ``[A -I] [x; s] = 0`` with slack bounds ``[rl, ru]``, so
the all-slack basis is always available and the right-hand side is zero.
Phase 1 minimises total bound infeasibility of the basic variables under
a composite +-1 costing; phase 2 is the usual bounded-variable simplex.

The basis is kept as a sparse LU factorisation plus a chain of rank-one
eta updates, refactorised periodically, whenever the running solution
drifts off the equality system, and always before declaring any final
verdict. Duals are recomputed each iteration by one backward transform,
which keeps pricing exact under the phase-1 costs that change as basic
variables regain feasibility.

Pricing is Dantzig (most violating reduced cost) with a switch to Bland's
least-index rule after a run of degenerate pivots, which guarantees
termination. The ratio test is a two-pass Harris variant: the first pass
relaxes bounds by the feasibility tolerance to find the step ceiling, the
second picks the numerically largest pivot among blockers within it.
Rows, columns, and the cost vector are equilibrated by power-of-two
geometric-mean scaling so coefficients spanning many orders of magnitude
do not destabilise pivots or drown reduced costs in noise.

Everything is deterministic for a fixed problem and options.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .lp import LpProblem, LpSolution, SolverOptions, Status

# nonbasic-at-lower / nonbasic-at-upper / nonbasic-free / basic
_AT_LB, _AT_UB, _FREE, _BASIC = 0, 1, 2, 3

_PIVOT_TOL = 1e-9
_DEGEN_STEP = 1e-10
_DRIFT_CHECK_EVERY = 16
_DRIFT_LIMIT = 1e-8


def solve_revised_simplex(problem: LpProblem, options: SolverOptions) -> LpSolution:
    n = problem.num_variables
    m = problem.num_rows

    if n == 0:
        return LpSolution(Status.OPTIMAL, np.zeros(0), np.zeros(m), 0.0, 0)

    c0 = problem.objective.copy()
    lo0 = problem.var_lower.copy()
    up0 = problem.var_upper.copy()
    A0 = problem.matrix_csc()

    if options.scale and problem.num_nonzeros:
        rscale, cscale = _geometric_mean_scales(A0, m, n)
    else:
        rscale, cscale = np.ones(m), np.ones(n)

    # substitute x = S x': columns scaled by cscale, rows by rscale
    A = sp.diags(rscale) @ A0 @ sp.diags(cscale) if m else A0
    c = c0 * cscale
    with np.errstate(invalid="ignore"):
        lo = lo0 / cscale
        up = up0 / cscale
        rl = problem.row_lower * rscale
        ru = problem.row_upper * rscale

    if m == 0:
        return _solve_boxed(problem, c, lo, up, cscale)

    # normalise the cost vector so the dual tolerance is meaningful: noise
    # in reduced costs is proportional to the largest cost magnitude, and
    # zero-cost columns must not pick it up as a phantom improving direction
    cmax = float(np.abs(c).max())
    cost_scale = np.exp2(np.round(np.log2(cmax))) if cmax > 0 else 1.0
    state = _SimplexState(A.tocsc(), c / cost_scale, lo, up, rl, ru, options)
    status, iterations = state.run()

    x = state.x[:n] * cscale
    # nonbasic structurals sit exactly on their scaled bound; snap the
    # unscaled value to the original bound to remove scaling round-off
    nb_lb = state.status[:n] == _AT_LB
    nb_ub = state.status[:n] == _AT_UB
    x[nb_lb] = lo0[nb_lb]
    x[nb_ub] = up0[nb_ub]
    y = state.dual_values() * cost_scale * rscale
    objective = float(c0 @ x) if status is not Status.UNBOUNDED else -np.inf
    return LpSolution(status, x, y, objective, iterations)


def _solve_boxed(problem, c, lo, up, cscale):
    """No rows: pick the cheapest bound for every variable."""
    n = c.shape[0]
    x = np.where(c > 0, lo, np.where(c < 0, up, np.where(np.isfinite(lo), lo, 0.0)))
    x = np.where(np.isfinite(x), x, np.where(np.isfinite(lo), lo, 0.0))
    if np.any((c > 0) & ~np.isfinite(lo)) or np.any((c < 0) & ~np.isfinite(up)):
        return LpSolution(Status.UNBOUNDED, np.zeros(n), np.zeros(0), -np.inf, 0)
    xs = x * cscale
    return LpSolution(Status.OPTIMAL, xs, np.zeros(0), float(problem.objective @ xs), 0)


def _geometric_mean_scales(A: sp.csc_matrix, m: int, n: int):
    """Two-pass geometric-mean equilibration, rounded to powers of two."""
    coo = A.tocoo()
    mask = coo.data != 0
    rows, cols = coo.row[mask], coo.col[mask]
    rscale = np.ones(m)
    cscale = np.ones(n)
    if rows.size == 0:
        return rscale, cscale
    logv = np.log2(np.abs(coo.data[mask]))
    with np.errstate(invalid="ignore"):
        for _ in range(2):
            rmax = np.full(m, -np.inf)
            rmin = np.full(m, np.inf)
            np.maximum.at(rmax, rows, logv)
            np.minimum.at(rmin, rows, logv)
            radj = np.where(np.isfinite(rmax), np.round(-(rmax + rmin) / 2.0), 0.0)
            logv += radj[rows]
            rscale *= np.exp2(radj)
            cmax = np.full(n, -np.inf)
            cmin = np.full(n, np.inf)
            np.maximum.at(cmax, cols, logv)
            np.minimum.at(cmin, cols, logv)
            cadj = np.where(np.isfinite(cmax), np.round(-(cmax + cmin) / 2.0), 0.0)
            logv += cadj[cols]
            cscale *= np.exp2(cadj)
    return rscale, cscale


class _BasisFactor:
    """B^-1 as a sparse LU of the basis plus a chain of eta updates."""

    def __init__(self, basis_matrix: sp.csc_matrix):
        self.m = basis_matrix.shape[0]
        try:
            self._lu = spla.splu(basis_matrix.tocsc())
            self._dense = None
        except RuntimeError:
            # singular to working precision; fall back to a pseudo-inverse
            self._dense = np.linalg.pinv(basis_matrix.toarray())
            self._lu = None
        self._eta_r: list[int] = []
        self._eta_w: list[np.ndarray] = []

    @property
    def updates(self) -> int:
        return len(self._eta_r)

    def push_eta(self, r: int, w: np.ndarray) -> None:
        self._eta_r.append(r)
        self._eta_w.append(w.copy())

    def ftran(self, v: np.ndarray) -> np.ndarray:
        if self._lu is not None:
            z = self._lu.solve(v)
        else:
            z = self._dense @ v
        for r, w in zip(self._eta_r, self._eta_w):
            zr = z[r]
            if zr != 0.0:
                t = zr / w[r]
                z -= t * w
                z[r] = t
        return z

    def btran(self, v: np.ndarray) -> np.ndarray:
        # transposed etas touch only component r: u_r -= (w.u - u_r) / w_r
        u = v.copy()
        for r, w in zip(reversed(self._eta_r), reversed(self._eta_w)):
            ur = u[r]
            u[r] = ur - (float(w @ u) - ur) / w[r]
        if self._lu is not None:
            return self._lu.solve(u, trans="T")
        return self._dense.T @ u


class _SimplexState:
    def __init__(self, A: sp.csc_matrix, c, lo, up, rl, ru, options: SolverOptions):
        self.m = A.shape[0]
        self.n = A.shape[1]
        self.N = self.n + self.m  # structurals + slacks
        self.options = options

        # extended system [A -I]; slack j = n + i carries row i's activity
        self.Aext = sp.hstack([A, -sp.identity(self.m, format="csc")], format="csc")
        self.AextT = self.Aext.T.tocsr()
        self.cost = np.concatenate([c, np.zeros(self.m)])
        self.lo = np.concatenate([lo, rl])
        self.up = np.concatenate([up, ru])

        self.ftol = np.full(self.N, options.tol_feas)
        self.dtol = options.tol_opt * (1.0 + np.abs(self.cost))

        self.status = np.empty(self.N, dtype=np.int8)
        self.x = np.zeros(self.N)
        lof = np.isfinite(self.lo)
        upf = np.isfinite(self.up)
        pick_lb = lof & (~upf | (np.abs(self.lo) <= np.abs(self.up)))
        self.status[: self.n] = np.where(
            pick_lb[: self.n], _AT_LB, np.where(upf[: self.n], _AT_UB, _FREE)
        )
        self.x[: self.n] = np.where(
            self.status[: self.n] == _AT_LB, self.lo[: self.n],
            np.where(self.status[: self.n] == _AT_UB, self.up[: self.n], 0.0),
        )

        self.basis = np.arange(self.n, self.n + self.m)
        self.status[self.basis] = _BASIC
        self.factor = _BasisFactor(self.Aext[:, self.basis])
        self.x[self.basis] = self.Aext[:, : self.n] @ self.x[: self.n]

        self.phase = 1
        self.bland = False
        self.stall = 0
        self.iterations = 0
        self.since_refactor = 0

    # -- infeasibility bookkeeping --------------------------------------
    def _infeasibility(self):
        xb = self.x[self.basis]
        below = self.lo[self.basis] - xb
        above = xb - self.up[self.basis]
        below = np.where(np.isfinite(below), below, -np.inf)
        above = np.where(np.isfinite(above), above, -np.inf)
        return below, above

    def _phase_basis_costs(self):
        if self.phase == 2:
            return self.cost[self.basis]
        below, above = self._infeasibility()
        tol = self.ftol[self.basis]
        return np.where(below > tol, -1.0, np.where(above > tol, 1.0, 0.0))

    def _total_infeasibility(self):
        below, above = self._infeasibility()
        tol = self.ftol[self.basis]
        bad = np.maximum(np.where(below > tol, below, 0.0),
                         np.where(above > tol, above, 0.0))
        return float(bad.sum())

    # -- linear algebra ---------------------------------------------------
    def _column(self, j):
        a = self.Aext
        s, e = a.indptr[j], a.indptr[j + 1]
        return a.indices[s:e], a.data[s:e]

    def _ftran_column(self, j):
        idx, vals = self._column(j)
        v = np.zeros(self.m)
        v[idx] = vals
        return self.factor.ftran(v)

    def _refactor(self):
        self.factor = _BasisFactor(self.Aext[:, self.basis])
        z = self.x.copy()
        z[self.basis] = 0.0
        rhs = -(self.Aext @ z)
        self.x[self.basis] = self.factor.ftran(rhs)
        self.since_refactor = 0

    def _drifted(self) -> bool:
        residual = self.Aext @ self.x
        return bool(np.abs(residual).max() > _DRIFT_LIMIT)

    # -- pricing ----------------------------------------------------------
    def _price(self):
        cb = self._phase_basis_costs()
        y = self.factor.btran(cb)
        if self.phase == 2:
            d = self.cost - self.AextT @ y
        else:
            d = -(self.AextT @ y)
        open_range = (self.up - self.lo) > 0.0
        stat = self.status
        inc_ok = ((stat == _AT_LB) | (stat == _FREE)) & open_range & (d < -self.dtol)
        dec_ok = ((stat == _AT_UB) | (stat == _FREE)) & open_range & (d > self.dtol)
        eligible = inc_ok | dec_ok
        if not eligible.any():
            return -1, 0.0
        if self.bland:
            q = int(np.argmax(eligible))
        else:
            score = np.where(eligible, np.abs(d), 0.0)
            q = int(np.argmax(score))
        direction = 1.0 if inc_ok[q] else -1.0
        return q, direction

    # -- two-pass ratio test ------------------------------------------------
    def _ratio_test(self, q, direction, w):
        """Return (step, blocking basis position, bound values).

        Position -1 means the entering variable flips to its other bound,
        -2 means nothing blocks.
        """
        wdir = direction * w
        xb = self.x[self.basis]
        lob = self.lo[self.basis]
        upb = self.up[self.basis]
        tolb = self.ftol[self.basis]

        nonzero = np.abs(wdir) > _PIVOT_TOL
        decreasing = nonzero & (wdir > 0)
        increasing = nonzero & (wdir < 0)

        # crossing bound of each basic variable in the movement direction
        targets = np.full(self.m, np.nan)
        if self.phase == 1:
            below = xb < lob - tolb
            above = xb > upb + tolb
            inside = ~below & ~above
            sel = decreasing & above
            targets[sel] = upb[sel]
            sel = decreasing & inside & np.isfinite(lob)
            targets[sel] = lob[sel]
            sel = increasing & below
            targets[sel] = lob[sel]
            sel = increasing & inside & np.isfinite(upb)
            targets[sel] = upb[sel]
        else:
            sel = decreasing & np.isfinite(lob)
            targets[sel] = lob[sel]
            sel = increasing & np.isfinite(upb)
            targets[sel] = upb[sel]

        blockable = np.isfinite(targets)
        ratios = np.full(self.m, np.inf)
        relaxed = np.full(self.m, np.inf)
        if blockable.any():
            gap = xb[blockable] - targets[blockable]
            wb = wdir[blockable]
            ratios[blockable] = gap / wb
            relaxed[blockable] = (gap + np.sign(wb) * tolb[blockable]) / wb
        ratios = np.maximum(ratios, 0.0)

        own = self.up[q] - self.lo[q]  # entering variable reaching its other bound
        ceiling = float(relaxed.min()) if self.m else np.inf

        if own <= ceiling and np.isfinite(own):
            return own, -1, targets
        if not np.isfinite(ceiling):
            return np.inf, -2, targets

        cands = np.nonzero(ratios <= ceiling)[0]
        if cands.size == 0:
            cands = np.nonzero(relaxed <= ceiling)[0]
        if self.bland:
            r = int(cands[np.argmin(self.basis[cands])])
        else:
            r = int(cands[np.argmax(np.abs(wdir[cands]))])
        step = max(float(ratios[r]), 0.0)
        if np.isfinite(own) and own <= step:
            return own, -1, targets
        return step, r, targets

    # -- pivots ------------------------------------------------------------
    def _apply_flip(self, q, direction, w, step):
        self.x[self.basis] -= step * direction * w
        self.x[q] = self.up[q] if direction > 0 else self.lo[q]
        self.status[q] = _AT_UB if direction > 0 else _AT_LB

    def _apply_pivot(self, q, direction, w, step, r, targets):
        leaving = self.basis[r]
        self.x[self.basis] -= step * direction * w
        self.x[q] = self.x[q] + direction * step
        self.x[leaving] = targets[r]
        self.status[leaving] = _AT_LB if targets[r] == self.lo[leaving] else _AT_UB
        self.status[q] = _BASIC
        self.basis[r] = q
        self.factor.push_eta(r, w)

    # -- main loop -----------------------------------------------------------
    def run(self):
        opts = self.options
        if self._total_infeasibility() <= 0.0:
            self.phase = 2
        while True:
            if self.iterations >= opts.max_iterations:
                return Status.ITERATION_LIMIT, self.iterations

            q, direction = self._price()
            if q < 0:
                # never declare a verdict on a stale factorisation
                if self.since_refactor > 0:
                    self._refactor()
                    continue
                if self.phase == 1:
                    if self._total_infeasibility() > 0.0:
                        return Status.INFEASIBLE, self.iterations
                    self.phase = 2
                    continue
                return Status.OPTIMAL, self.iterations

            w = self._ftran_column(q)
            step, r, targets = self._ratio_test(q, direction, w)

            if r == -2:
                if self.since_refactor > 0:
                    self._refactor()
                    continue
                if self.phase == 2:
                    return Status.UNBOUNDED, self.iterations
                # an improving phase-1 direction always reaches a violated
                # bound; getting here means numerical trouble, so rebuild
                self._refactor()
                self.iterations += 1
                continue

            if r == -1:
                self._apply_flip(q, direction, w, step)
            else:
                self._apply_pivot(q, direction, w, step, r, targets)

            self.iterations += 1
            self.since_refactor += 1

            if step <= _DEGEN_STEP:
                self.stall += 1
                if self.stall >= opts.stall_threshold:
                    self.bland = True
            else:
                self.stall = 0
                self.bland = False

            if self.since_refactor >= opts.refactor_every or (
                self.iterations % _DRIFT_CHECK_EVERY == 0 and self._drifted()
            ):
                self._refactor()

            if self.phase == 1 and self._total_infeasibility() <= 0.0:
                self.phase = 2

    def dual_values(self):
        return self.factor.btran(self.cost[self.basis])
