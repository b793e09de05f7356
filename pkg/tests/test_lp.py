import numpy as np
import pytest
from scipy.optimize import linprog

from hems_sa.exceptions import Infeasible, SolverFailure
from hems_sa.lp import solve_lp


def _reference(c, A, b, lo, hi):
    bounds = [(l, None if np.isinf(h) else h) for l, h in zip(lo, hi)]
    return linprog(c, A_eq=A, b_eq=b, bounds=bounds, method="highs")


@pytest.mark.parametrize("seed", range(40))
def test_matches_highs_on_random_programs(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 8)), int(rng.integers(2, 16))
    A = rng.integers(-3, 4, size=(m, n)).astype(float)
    b = A @ rng.uniform(0, 2, n)
    lo = np.zeros(n)
    hi = np.where(rng.random(n) < 0.3, np.inf, rng.uniform(2, 4, n))
    c = rng.normal(size=n)
    ref = _reference(c, A, b, lo, hi)
    if ref.status == 3:
        with pytest.raises(SolverFailure):
            solve_lp(c, A, b, lo, hi)
        return
    res = solve_lp(c, A, b, lo, hi)
    assert res.objective == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)
    np.testing.assert_allclose(A @ res.x, b, atol=1e-7)
    assert np.all(res.x >= lo) and np.all(res.x <= hi)


def test_beale_degenerate_program_terminates():
    # Beale's example cycles under the textbook largest-coefficient rule.
    c = np.array([-0.75, 150, -0.02, 6, 0, 0, 0])
    A = np.array([
        [0.25, -60, -0.04, 9, 1, 0, 0],
        [0.5, -90, -0.02, 3, 0, 1, 0],
        [0, 0, 1, 0, 0, 0, 1],
    ])
    b = np.array([0.0, 0.0, 1.0])
    res = solve_lp(c, A, b, np.zeros(7), np.full(7, np.inf))
    assert res.objective == pytest.approx(-0.05)


def test_infeasible():
    A = np.array([[1.0, 1.0]])
    with pytest.raises(Infeasible):
        solve_lp([1, 1], A, [5.0], [0, 0], [1, 1])


def test_bound_flip_only():
    # optimum at the box corner with no basis change needed
    res = solve_lp([-1.0, -2.0, 0.0], np.array([[1.0, 1.0, 1.0]]), [10.0], [0, 0, 0], [3, 4, np.inf])
    np.testing.assert_allclose(res.x, [3, 4, 3])


def test_iteration_cap():
    c = -np.ones(6)
    A = np.eye(3, 6) + np.eye(3, 6, 3)
    with pytest.raises(SolverFailure):
        solve_lp(c, A, np.ones(3), np.zeros(6), np.full(6, np.inf), max_iter=1)
