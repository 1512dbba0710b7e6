import numpy as np
import pytest

from heatplan.lp import (DimensionMismatch, LpProblem, LpSolution,
                         MalformedProblem, SolverOptions, Status,
                         check_solution, solve)

from lp_oracle import random_bounded_lp, vertex_enumeration_minimum


def boxed(c, a, rl, ru, lo, up):
    return LpProblem.from_dense(c, a, rl, ru, lo, up)


def test_single_active_bound():
    p = boxed([1.0], np.zeros((0, 1)), [], [], [1.0], [np.inf])
    s = solve(p)
    assert s.status is Status.OPTIMAL
    assert s.primal[0] == pytest.approx(1.0)
    assert s.objective_value == pytest.approx(1.0)


def test_symmetric_facet_objective():
    p = boxed([-1.0, -1.0], [[1.0, 1.0]], [-np.inf], [1.0], [0.0, 0.0],
              [np.inf, np.inf])
    s = solve(p)
    assert s.status is Status.OPTIMAL
    # any point on x+y=1 is optimal; only the objective is pinned
    assert s.objective_value == pytest.approx(-1.0, abs=1e-9)


def test_infeasible_detection():
    p = boxed([1.0], [[1.0], [1.0]], [1.0, -np.inf], [np.inf, 0.0],
              [-np.inf], [np.inf])
    assert solve(p).status is Status.INFEASIBLE


def test_unbounded_detection():
    p = boxed([-1.0], np.zeros((0, 1)), [], [], [0.0], [np.inf])
    assert solve(p).status is Status.UNBOUNDED
    p = boxed([-1.0, 0.0], [[1.0, 1.0]], [0.0], [np.inf], [0.0, 0.0],
              [np.inf, np.inf])
    assert solve(p).status is Status.UNBOUNDED


def test_matches_vertex_enumeration_oracle():
    rng = np.random.default_rng(42)
    for _ in range(60):
        c, a, rl, ru, lo, up = random_bounded_lp(rng, max_vars=5, max_rows=4)
        expected, _ = vertex_enumeration_minimum(c, a, rl, ru, lo, up)
        assert expected is not None
        s = solve(boxed(c, a, rl, ru, lo, up))
        assert s.status is Status.OPTIMAL
        assert s.objective_value == pytest.approx(expected, abs=1e-7)


def test_optimal_solutions_pass_check():
    rng = np.random.default_rng(7)
    opts = SolverOptions()
    for _ in range(40):
        c, a, rl, ru, lo, up = random_bounded_lp(rng)
        p = boxed(c, a, rl, ru, lo, up)
        s = solve(p, opts)
        assert s.status is Status.OPTIMAL
        report = check_solution(p, s, opts.tol_feas)
        assert report.max_row_residual <= opts.tol_feas
        assert report.max_bound_violation <= opts.tol_feas
        assert report.duality_gap <= opts.tol_gap * (1 + abs(s.objective_value))


def test_objective_scaling_scales_optimum():
    rng = np.random.default_rng(3)
    for lam in (2.0, 10.0, 1e4):
        c, a, rl, ru, lo, up = random_bounded_lp(rng)
        base = solve(boxed(c, a, rl, ru, lo, up))
        scaled = solve(boxed(lam * np.asarray(c), a, rl, ru, lo, up))
        assert scaled.status is Status.OPTIMAL
        assert scaled.objective_value == pytest.approx(
            lam * base.objective_value, rel=1e-9, abs=1e-12
        )


def test_duplicate_row_keeps_objective():
    rng = np.random.default_rng(11)
    c, a, rl, ru, lo, up = random_bounded_lp(rng)
    base = solve(boxed(c, a, rl, ru, lo, up))
    a2 = np.vstack([a, a[0]])
    rl2 = np.append(rl, rl[0])
    ru2 = np.append(ru, ru[0])
    dup = solve(boxed(c, a2, rl2, ru2, lo, up))
    assert dup.objective_value == pytest.approx(base.objective_value, rel=1e-7)


def test_deterministic_for_fixed_inputs():
    rng = np.random.default_rng(5)
    c, a, rl, ru, lo, up = random_bounded_lp(rng)
    p = boxed(c, a, rl, ru, lo, up)
    s1 = solve(p)
    s2 = solve(p)
    assert s1.iterations == s2.iterations
    assert np.array_equal(s1.primal, s2.primal)
    assert np.array_equal(s1.duals, s2.duals)


def test_check_solution_examples():
    p = boxed([1.0], np.zeros((0, 1)), [], [], [1.0], [np.inf])
    good = LpSolution(Status.OPTIMAL, np.array([1.0]), np.zeros(0), 1.0, 0)
    report = check_solution(p, good, 1e-7)
    assert report.max_row_residual == 0.0
    assert report.max_bound_violation == 0.0
    assert report.duality_gap == 0.0  # reduced cost 1 pairs with the lower bound

    bad = LpSolution(Status.OPTIMAL, np.array([0.5]), np.zeros(0), 0.5, 0)
    assert check_solution(p, bad, 1e-7).max_bound_violation == pytest.approx(0.5)


def test_check_solution_dimension_mismatch():
    p = boxed([1.0, 2.0], [[1.0, 0.0]], [0.0], [1.0], [0.0, 0.0], [1.0, 1.0])
    s = LpSolution(Status.OPTIMAL, np.zeros(3), np.zeros(1), 0.0, 0)
    with pytest.raises(DimensionMismatch):
        check_solution(p, s)


def test_malformed_problems_rejected():
    with pytest.raises(MalformedProblem):
        solve(LpProblem([1.0], [0], [5], [1.0], [0.0], [1.0], [0.0], [1.0]))
    with pytest.raises(MalformedProblem):
        solve(LpProblem([np.nan], [], [], [], [], [], [0.0], [1.0]))
    with pytest.raises(MalformedProblem):
        solve(LpProblem([1.0], [], [], [], [], [], [2.0], [1.0]))


def test_iteration_limit_reported():
    rng = np.random.default_rng(9)
    c, a, rl, ru, lo, up = random_bounded_lp(rng)
    s = solve(boxed(c, a, rl, ru, lo, up), SolverOptions(max_iterations=1))
    assert s.status in (Status.ITERATION_LIMIT, Status.OPTIMAL)


def test_equality_rows_and_free_variables():
    # min 2x + y with x + y = 3, x >= 0, y free: substitute y = 3 - x to get
    # 3 + x, so the optimum sits at x = 0, y = 3
    p = boxed([2.0, 1.0], [[1.0, 1.0]], [3.0], [3.0], [0.0, -np.inf],
              [np.inf, np.inf])
    s = solve(p)
    assert s.status is Status.OPTIMAL
    assert s.objective_value == pytest.approx(3.0)
    assert s.primal[0] == pytest.approx(0.0, abs=1e-9)
    assert s.primal[1] == pytest.approx(3.0, abs=1e-9)
