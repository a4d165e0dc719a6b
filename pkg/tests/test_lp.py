import numpy as np
import pytest
from scipy.optimize import linprog

from lp_oracles import feasibility_violation, kkt_residual, random_feasible_lp
from onebit_bnb.errors import DimensionError, IterationLimitError
from onebit_bnb.lp import LinearProgram, WarmStart, solve_lp

C1 = 1 / np.sqrt(2)


def test_min_of_upper_bounds():
    sol = solve_lp(LinearProgram([-1.0], [[-1.0], [-1.0]], [-3.0, -5.0]))
    assert sol.status == "optimal"
    assert sol.v[0] == pytest.approx(3.0)
    assert sol.objective == pytest.approx(-3.0)


def test_single_antenna_relaxation_corner():
    p = LinearProgram([0, 0, -1], [[1, 0, -1], [0, 1, -1]], [0, 0], [-C1, -C1, -np.inf], [C1, C1, np.inf])
    sol = solve_lp(p)
    np.testing.assert_allclose(sol.v, [C1, C1, C1], atol=1e-14)


def test_infeasible_program():
    # v >= 2 with v <= 1
    sol = solve_lp(LinearProgram([1.0], [[1.0]], [2.0], [0.0], [1.0]))
    assert sol.status == "infeasible"
    assert sol.v is None


def test_unbounded_program():
    sol = solve_lp(LinearProgram([-1.0, 0.0], [[1.0, 1.0]], [0.0]))
    assert sol.status == "unbounded"
    assert sol.v is None


def test_iteration_limit_is_distinct_from_infeasibility(rng):
    c, A, b, lo, hi = random_feasible_lp(np.random.default_rng(3), 30, 40)
    p = LinearProgram(c, A, b, lo, hi)
    if solve_lp(p).iterations < 2:
        pytest.skip("instance solved too quickly to exhaust the budget")
    with pytest.raises(IterationLimitError):
        solve_lp(p, max_iter=1)


def test_rejects_malformed():
    with pytest.raises(DimensionError):
        LinearProgram([1.0, 2.0], [[1.0]], [0.0])
    with pytest.raises(ValueError):
        LinearProgram([1.0], [[1.0]], [0.0], [1.0], [0.0])
    with pytest.raises(DimensionError):
        LinearProgram([1.0], np.zeros((0, 1)), [])


def test_zero_cost_returns_feasible_point():
    A = np.array([[1.0, 1.0], [1.0, -1.0]])
    p = LinearProgram([0.0, 0.0], A, [1.0, -0.5], [-5, -5], [5, 5])
    sol = solve_lp(p)
    assert sol.status == "optimal"
    assert feasibility_violation(p, sol.v) <= 1e-9


def test_degenerate_duplicated_rows_terminate():
    rng = np.random.default_rng(17)
    for _ in range(50):
        c, A, b, lo, hi = random_feasible_lp(rng, 10, 10)
        A = np.vstack([A, A, A[:1] * 2.0])
        b = np.concatenate([b, b, b[:1] * 2.0])
        p = LinearProgram(c, A, b, lo, hi)
        sol = solve_lp(p)
        ref = linprog(c, A_ub=-A, b_ub=-b, bounds=_bounds(lo, hi), method="highs")
        if ref.status == 0:
            assert sol.objective == pytest.approx(ref.fun, abs=1e-8, rel=1e-9)


def _bounds(lo, hi):
    return [(None if np.isinf(a) else a, None if np.isinf(z) else z) for a, z in zip(lo, hi)]


def test_matches_highs_and_certifies(backend):
    rng = np.random.default_rng(23)
    for _ in range(150):
        c, A, b, lo, hi = random_feasible_lp(rng, 20, 30)
        p = LinearProgram(c, A, b, lo, hi)
        sol = solve_lp(p, kernel=backend.simplex_loop)
        ref = linprog(c, A_ub=-A, b_ub=-b, bounds=_bounds(lo, hi), method="highs")
        assert sol.status == {0: "optimal", 3: "unbounded"}[ref.status]
        if sol.status == "optimal":
            assert sol.objective == pytest.approx(ref.fun, abs=1e-8, rel=1e-9)
            assert feasibility_violation(p, sol.v) <= 1e-9
            assert kkt_residual(p, sol.v) <= 1e-7


def test_solver_multipliers_certify_optimality(rng):
    for _ in range(100):
        c, A, b, lo, hi = random_feasible_lp(rng, 15, 25, unbounded_frac=0.0)
        p = LinearProgram(c, A, b, lo, hi)
        sol = solve_lp(p)
        assert np.all(sol.duals >= -1e-9)
        # complementary slackness on rows
        assert np.all(np.abs(sol.duals * (A @ sol.v - b)) <= 1e-8)
        # reduced costs: nonnegative at lower bounds, nonpositive at upper, zero inside
        at_lo = np.isclose(sol.v, lo, atol=1e-12)
        at_hi = np.isclose(sol.v, hi, atol=1e-12)
        d = sol.reduced_costs
        assert np.all(d[at_lo & ~at_hi] >= -1e-9)
        assert np.all(d[at_hi & ~at_lo] <= 1e-9)
        assert np.all(np.abs(d[~at_lo & ~at_hi]) <= 1e-9)


def test_beats_sampled_feasible_points():
    rng = np.random.default_rng(31)
    for _ in range(25):
        n, m = int(rng.integers(2, 6)), int(rng.integers(1, 6))
        A = rng.standard_normal((m, n))
        lo, hi = -np.ones(n), np.ones(n)
        b = A @ rng.uniform(-0.5, 0.5, n) - rng.uniform(0.2, 1.0, m)
        c = rng.standard_normal(n)
        sol = solve_lp(LinearProgram(c, A, b, lo, hi))
        pts = rng.uniform(-1, 1, (10_000, n))
        feasible = pts[np.all(pts @ A.T >= b, axis=1)]
        assert len(feasible) > 0
        assert sol.objective <= np.min(feasible @ c) + 1e-8


def test_deterministic(rng):
    c, A, b, lo, hi = random_feasible_lp(rng)
    p = LinearProgram(c, A, b, lo, hi)
    first, second = solve_lp(p), solve_lp(p)
    np.testing.assert_array_equal(first.v, second.v)
    assert first.iterations == second.iterations
    assert first.warm_handle == second.warm_handle
    again = solve_lp(p, first.warm_handle)
    np.testing.assert_array_equal(again.v, solve_lp(p, first.warm_handle).v)


def test_warm_start_resolve_is_cheap(rng):
    wins = total = 0
    while total < 200:
        c, A, b, lo, hi = random_feasible_lp(rng)
        sol = solve_lp(LinearProgram(c, A, b, lo, hi))
        if sol.status != "optimal":
            continue
        p2 = LinearProgram(c, A, b + 0.05 * rng.standard_normal(len(b)), lo, hi)
        cold, warm = solve_lp(p2), solve_lp(p2, sol.warm_handle)
        assert cold.status == warm.status
        if cold.status != "optimal":
            continue
        assert warm.objective == pytest.approx(cold.objective, abs=1e-8)
        total += 1
        wins += warm.iterations <= cold.iterations
    assert wins / total >= 0.9


def test_warm_start_after_fixing_leading_variable(rng):
    for _ in range(50):
        c, A, b, lo, hi = random_feasible_lp(rng, 12, 10, unbounded_frac=0.0)
        if len(c) < 2:
            continue
        parent = solve_lp(LinearProgram(c, A, b, lo, hi))
        fixed = hi[0]
        child = LinearProgram(c[1:], A[:, 1:], b - A[:, 0] * fixed, lo[1:], hi[1:])
        cold = solve_lp(child)
        warm = solve_lp(child, parent.warm_handle.drop_leading(1))
        assert warm.status == cold.status
        if cold.status == "optimal":
            assert warm.objective == pytest.approx(cold.objective, abs=1e-8)


def test_mismatched_handle_falls_back_to_cold():
    p = LinearProgram([-1.0], [[-1.0], [-1.0]], [-3.0, -5.0])
    bogus = WarmStart((0,), (0, 1, 1, 1), 2, 1)
    assert solve_lp(p, bogus).objective == pytest.approx(-3.0)
