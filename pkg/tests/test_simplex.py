import numpy as np
import pytest
import scipy.optimize

from bellopt.simplex import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LpProblem,
    solve_lp,
)


def lp(a, b, c):
    return LpProblem(np.asarray(a, float), np.asarray(b, float), np.asarray(c, float))


class TestBasics:
    def test_single_row(self):
        sol = solve_lp(lp([[1, 1]], [1], [1, 0]))
        assert sol.status == OPTIMAL
        assert sol.objective_value == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(sol.variable_values, [0.0, 1.0], atol=1e-12)

    def test_contradictory_equalities(self):
        sol = solve_lp(lp([[1], [1]], [1, 2], [0]))
        assert sol.status == INFEASIBLE

    def test_duplicated_rows_tolerated(self):
        sol = solve_lp(lp([[1, 1], [1, 1]], [1, 1], [1, 0]))
        assert sol.status == OPTIMAL
        assert sol.objective_value == pytest.approx(0.0, abs=1e-12)

    def test_unbounded(self):
        sol = solve_lp(lp([[1, -1]], [0], [-1, 0]))
        assert sol.status == UNBOUNDED

    def test_negative_rhs_rows_flipped(self):
        sol = solve_lp(lp([[-1, 0]], [-1], [0, 0]))
        assert sol.status == OPTIMAL
        assert sol.variable_values[0] == pytest.approx(1.0, abs=1e-12)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            lp([[np.inf, 1]], [1], [0, 0])

    def test_rejects_bad_pricing(self):
        with pytest.raises(ValueError):
            solve_lp(lp([[1, 1]], [1], [1, 0]), pricing="newton")

    def test_highly_degenerate_vertex(self):
        # transportation-style system: many ties in every ratio test
        a = np.zeros((6, 9))
        for i in range(3):
            a[i, 3 * i : 3 * i + 3] = 1.0
            a[3 + i, i::3] = 1.0
        b = np.array([1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
        c = np.array([0.0, 4.0, 2.0, 3.0, 1.0, 5.0, 6.0, 7.0, 1.0])
        for pricing in ("devex", "dantzig", "bland"):
            sol = solve_lp(lp(a, b, c), pricing=pricing)
            assert sol.status == OPTIMAL
            assert sol.objective_value == pytest.approx(2.0, abs=1e-9)


class TestSolutionQuality:
    def test_residual_certificate(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(8, 20))
        x_feasible = np.abs(rng.normal(size=20))
        b = a @ x_feasible
        c = np.abs(rng.normal(size=20))
        sol = solve_lp(lp(a, b, c))
        assert sol.status == OPTIMAL
        assert np.max(np.abs(a @ sol.variable_values - b)) < 1e-9
        assert np.min(sol.variable_values) > -1e-12

    def test_deterministic_reruns(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(6, 15))
        b = a @ np.abs(rng.normal(size=15))
        c = np.abs(rng.normal(size=15))
        first = solve_lp(lp(a, b, c))
        second = solve_lp(lp(a, b, c))
        assert first.objective_value == second.objective_value
        assert np.array_equal(first.variable_values, second.variable_values)
        assert first.iterations == second.iterations

    @pytest.mark.parametrize("pricing", ["devex", "dantzig", "bland"])
    def test_matches_reference_solver(self, pricing):
        # feasible bounded instances: b = A x0 with x0 >= 0 and c >= 0
        rng = np.random.default_rng(2)
        for trial in range(30):
            rows = int(rng.integers(2, 12))
            cols = int(rng.integers(rows, 30))
            a = rng.normal(size=(rows, cols))
            if trial % 3 == 0:
                a[rng.integers(rows)] = a[rng.integers(rows)]  # force redundancy
            b = a @ np.abs(rng.normal(size=cols))
            c = np.abs(rng.normal(size=cols))
            mine = solve_lp(lp(a, b, c), pricing=pricing)
            reference = scipy.optimize.linprog(c, A_eq=a, b_eq=b, bounds=(0, None), method="highs")
            assert mine.status == OPTIMAL
            assert reference.status == 0
            assert mine.objective_value == pytest.approx(reference.fun, abs=1e-8)

    def test_infeasible_matches_reference(self):
        rng = np.random.default_rng(3)
        hits = 0
        for _ in range(20):
            a = rng.normal(size=(6, 8))
            b = rng.normal(size=6)
            reference = scipy.optimize.linprog(
                np.zeros(8), A_eq=a, b_eq=b, bounds=(0, None), method="highs"
            )
            mine = solve_lp(lp(a, b, np.zeros(8)))
            if reference.status == 2:
                assert mine.status == INFEASIBLE
                hits += 1
            elif reference.status == 0:
                assert mine.status == OPTIMAL
        assert hits > 0  # the draw actually produced infeasible instances
