"""Bounded-variable primal simplex for small dense linear programs.

Solves::

    min  c @ x
    s.t. A_eq @ x == b_eq
         lower <= x <= upper

with finite lower bounds and possibly infinite upper bounds. A two-phase
method is used with one artificial column per row; entering and leaving
variables follow Bland's rule, so the method terminates on degenerate
problems. The problems built by the day-ahead scheduler have roughly a
hundred columns, well inside dense territory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import Infeasible, SolverFailure

OPT_TOL = 1e-9  # reduced-cost optimality tolerance
PIV_TOL = 1e-9  # smallest usable pivot magnitude
FEAS_TOL = 1e-7  # phase-one residual accepted as feasible


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    objective: float
    iterations: int


class _Tableau:
    def __init__(self, A, b, lower, upper):
        m, n = A.shape
        self.m, self.n = m, n
        self.lower = np.concatenate([lower, np.zeros(m)])
        self.upper = np.concatenate([upper, np.full(m, np.inf)])
        # nonbasic structurals start at their lower bound
        x = np.concatenate([lower.copy(), np.zeros(m)])
        resid = b - A @ lower
        sign = np.where(resid >= 0, 1.0, -1.0)
        self.T = np.hstack([A, np.diag(sign)])
        self.T /= sign[:, None]  # basis is diag(sign); make it the identity
        x[n:] = np.abs(resid)
        self.x = x
        self.basis = np.arange(n, n + m)
        self.is_basic = np.zeros(n + m, dtype=bool)
        self.is_basic[n:] = True
        self.at_upper = np.zeros(n + m, dtype=bool)  # meaningful for nonbasic columns only
        self.iterations = 0

    def reduced_costs(self, cost):
        return cost - cost[self.basis] @ self.T

    def run(self, cost, max_iter):
        d = self.reduced_costs(cost)
        T, x, lower, upper = self.T, self.x, self.lower, self.upper
        while True:
            at_upper = self.at_upper
            movable = (upper - lower) > 0
            can_up = ~self.is_basic & movable & ~at_upper & (d < -OPT_TOL)
            can_down = ~self.is_basic & movable & at_upper & (d > OPT_TOL)
            candidates = np.flatnonzero(can_up | can_down)
            if candidates.size == 0:
                return
            if self.iterations >= max_iter:
                raise SolverFailure(f"simplex exceeded {max_iter} iterations")
            self.iterations += 1

            j = int(candidates[0])  # Bland: lowest index
            direction = 1.0 if can_up[j] else -1.0
            alpha = T[:, j] * direction  # basic x decreases by alpha * t

            xb = x[self.basis]
            lb = lower[self.basis]
            ub = upper[self.basis]
            ratios = np.full(self.m, np.inf)
            dec = alpha > PIV_TOL
            inc = alpha < -PIV_TOL
            ratios[dec] = (xb[dec] - lb[dec]) / alpha[dec]
            ratios[inc] = (ub[inc] - xb[inc]) / -alpha[inc]
            np.maximum(ratios, 0.0, out=ratios)

            t_flip = upper[j] - lower[j]
            t_row = ratios.min() if self.m else np.inf
            if not np.isfinite(t_flip) and not np.isfinite(t_row):
                raise SolverFailure("linear program is unbounded")

            if t_flip <= t_row:
                x[self.basis] = xb - alpha * t_flip
                x[j] = upper[j] if direction > 0 else lower[j]
                at_upper[j] = direction > 0
                continue

            # Bland: among tied rows, the basic variable of lowest index leaves
            tied = np.flatnonzero(ratios <= t_row + 1e-12 * (1.0 + t_row))
            r = int(tied[np.argmin(self.basis[tied])])
            leaving = int(self.basis[r])

            x[self.basis] = xb - alpha * t_row
            x[j] += direction * t_row
            # snap the leaving variable onto the bound it reached
            x[leaving] = lower[leaving] if alpha[r] > 0 else upper[leaving]
            at_upper[leaving] = alpha[r] < 0

            pivot_row = T[r] / T[r, j]
            T -= np.outer(T[:, j], pivot_row)
            T[r] = pivot_row
            d -= d[j] * pivot_row

            self.is_basic[leaving] = False
            self.is_basic[j] = True
            self.basis[r] = j


def solve_lp(c, A_eq, b_eq, lower, upper, max_iter: int = 5000) -> LPResult:
    """Minimize ``c @ x`` over the box-constrained equality system."""
    c = np.asarray(c, dtype=np.float64)
    A = np.asarray(A_eq, dtype=np.float64)
    b = np.asarray(b_eq, dtype=np.float64)
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,) or lower.shape != (n,) or upper.shape != (n,):
        raise ValueError("inconsistent LP dimensions")
    if not np.all(np.isfinite(lower)):
        raise ValueError("lower bounds must be finite")
    if np.any(upper < lower):
        raise Infeasible("a variable has upper bound below its lower bound")

    tab = _Tableau(A, b, lower, upper)

    phase1 = np.concatenate([np.zeros(n), np.ones(m)])
    tab.run(phase1, max_iter)
    infeasibility = float(tab.x[n:].sum())
    if infeasibility > FEAS_TOL * (1.0 + np.abs(b).max(initial=0.0)):
        raise Infeasible(f"no feasible point (phase-one residual {infeasibility:.3g})")

    # pin artificials at zero; basic ones stay in the basis harmlessly
    tab.x[n:] = 0.0
    tab.upper[n:] = 0.0
    tab.at_upper[n:] = False
    phase2 = np.concatenate([c, np.zeros(m)])
    tab.run(phase2, max_iter)

    x = np.clip(tab.x[:n], lower, upper)
    return LPResult(x=x, objective=float(c @ x), iterations=tab.iterations)
