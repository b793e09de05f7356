"""Day-ahead battery and trading schedule by linear programming.

Per hour ``h`` the household buys ``q_h`` Wh, sells a fraction ``p_h`` of
the PV output ``P(h)`` and moves ``B_h`` Wh through the battery::

    min  sum_h q_h * buy(h) - p_h * P(h) * sell(h)
    s.t. q_h = Y(h) + B_h - (1 - p_h) * P(h),   q_h >= 0,   0 <= p_h <= 1
         -max_discharge <= B_h <= max_charge,   0 <= E_h <= capacity

The conditional storage update (charging loses ``1 - efficiency``,
discharging does not) is linearised by splitting ``B_h = c_h - d_h`` with
``E_h = E_{h-1} + efficiency * c_h - d_h``. Stored energy may only serve
the house, so ``d_h <= Y(h)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import N_HOURS, check_fraction, check_nonnegative
from .exceptions import DataError, Infeasible, SolverFailure
from .lp import solve_lp
from .profiles import HourlyProfile, PricingScheme

BALANCE_TOL = 1e-6  # Wh
KWH = 1000.0


@dataclass(frozen=True)
class BatterySpec:
    capacity: float = 0.0  # Wh
    max_charge: float = 0.0  # Wh per hour
    max_discharge: float = 0.0  # Wh per hour
    efficiency: float = 1.0
    initial_energy: float = 0.0  # Wh

    def __post_init__(self):
        for name in ("capacity", "max_charge", "max_discharge", "initial_energy"):
            object.__setattr__(self, name, check_nonnegative(getattr(self, name), name))
        check_fraction(self.efficiency, "efficiency")
        if self.initial_energy > self.capacity:
            raise DataError("initial_energy exceeds capacity")

    def with_capacity(self, capacity: float) -> "BatterySpec":
        return BatterySpec(capacity, self.max_charge, self.max_discharge, self.efficiency,
                           min(self.initial_energy, capacity))


@dataclass(frozen=True)
class OptimizationProblem:
    consumption: HourlyProfile
    forecast_generation: HourlyProfile
    pricing: PricingScheme
    battery: BatterySpec

    def __post_init__(self):
        if self.consumption.kind != "consumption":
            raise DataError("consumption profile has the wrong kind")
        if self.forecast_generation.kind != "generation":
            raise DataError("forecast_generation profile has the wrong kind")


@dataclass(frozen=True)
class DayAheadPlan:
    """Hour-by-hour decisions; every array has 24 entries, index 0 is hour 1."""

    q: np.ndarray  # Wh bought
    sold_fraction: np.ndarray
    battery_rate: np.ndarray  # Wh, > 0 charge, < 0 discharge
    energy: np.ndarray  # Wh stored at the end of each hour
    planned_cost: float  # EUR
    charge: np.ndarray = field(repr=False)  # split components of battery_rate
    discharge: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.q)

    def to_dict(self) -> dict:
        return {
            "planned_cost": self.planned_cost,
            "hours": [
                {
                    "hour": h + 1,
                    "q": float(self.q[h]),
                    "sold_fraction": float(self.sold_fraction[h]),
                    "battery_rate": float(self.battery_rate[h]),
                    "energy": float(self.energy[h]),
                }
                for h in range(len(self.q))
            ],
        }


def battery_step(e_prev: float, rate: float, efficiency: float) -> float:
    """Stored energy after one hour at `rate` (charging loses, discharging does not)."""
    if rate >= 0:
        return e_prev + efficiency * rate
    return e_prev + rate


def plan_cost(plan: DayAheadPlan, pricing: PricingScheme, generation: HourlyProfile) -> float:
    """Objective value of `plan` in EUR (prices are per kWh, energies in Wh)."""
    buy = float(np.dot(plan.q, pricing.buy.values))
    sell = float(np.dot(plan.sold_fraction * generation.values, pricing.sell.values))
    return (buy - sell) / KWH


def _build_lp(problem: OptimizationProblem):
    H = N_HOURS
    Y = problem.consumption.values
    P = problem.forecast_generation.values
    buy = problem.pricing.buy.values
    sell = problem.pricing.sell.values
    bat = problem.battery
    eta = bat.efficiency

    # column blocks: q, p, c, d, E
    iq, ip, ic, id_, ie = (k * H for k in range(5))
    n = 5 * H
    hours = np.arange(H)

    cost = np.zeros(n)
    cost[iq:iq + H] = buy / KWH
    cost[ip:ip + H] = -P * sell / KWH

    A = np.zeros((2 * H, n))
    b = np.zeros(2 * H)
    # energy balance: q - c + d - P p = Y - P
    A[hours, iq + hours] = 1.0
    A[hours, ic + hours] = -1.0
    A[hours, id_ + hours] = 1.0
    A[hours, ip + hours] = -P
    b[:H] = Y - P
    # storage: E_h - E_{h-1} - eta c + d = 0 (E_0 moved to the right-hand side)
    rows = H + hours
    A[rows, ie + hours] = 1.0
    A[rows[1:], ie + hours[:-1]] = -1.0
    A[rows, ic + hours] = -eta
    A[rows, id_ + hours] = 1.0
    b[H] = bat.initial_energy

    lower = np.zeros(n)
    upper = np.empty(n)
    upper[iq:iq + H] = np.inf
    upper[ip:ip + H] = np.where(P > 0, 1.0, 0.0)
    upper[ic:ic + H] = bat.max_charge
    upper[id_:id_ + H] = np.minimum(bat.max_discharge, Y)
    upper[ie:ie + H] = bat.capacity
    return cost, A, b, lower, upper


def _repair(q, p, c, d, Y, P, buy, sell, eta):
    """Remove simultaneous charge/discharge and simultaneous buy/sell without raising cost."""
    q, p, c, d = q.copy(), p.copy(), c.copy(), d.copy()
    for h in range(len(q)):
        if c[h] > 0 and d[h] > 0:
            # cancel dc of charge and eta*dc of discharge: stored energy is unchanged
            dc = min(c[h], d[h] / eta)
            c[h] -= dc
            d[h] -= eta * dc
            # the house now draws (1 - eta) * dc less: buy less first, then sell more
            slack = (1.0 - eta) * dc
            dq = min(q[h], slack)
            q[h] -= dq
            slack -= dq
            if slack > 0 and P[h] > 0:
                p[h] = min(1.0, p[h] + slack / P[h])
        if buy[h] >= sell[h] and q[h] > 0 and p[h] > 0 and P[h] > 0:
            m = min(q[h], p[h] * P[h])
            q[h] -= m
            p[h] = max(0.0, p[h] - m / P[h])
    # re-derive purchases from the balance so it holds to rounding error
    q = Y + (c - d) - (1.0 - p) * P
    q[(q < 0) & (q > -BALANCE_TOL)] = 0.0
    return q, p, c, d


def solve_day_ahead(problem: OptimizationProblem, max_iter: int = 5000) -> DayAheadPlan:
    """Globally cost-minimal day-ahead plan for `problem`."""
    cost, A, b, lower, upper = _build_lp(problem)
    try:
        res = solve_lp(cost, A, b, lower, upper, max_iter=max_iter)
    except Infeasible as exc:
        # purchases are unbounded above, so every instance is feasible
        raise SolverFailure(f"internal error: day-ahead LP reported infeasible ({exc})") from exc

    H = N_HOURS
    x = res.x
    q, p, c, d = x[:H], x[H:2 * H], x[2 * H:3 * H], x[3 * H:4 * H]
    Y = problem.consumption.values
    P = problem.forecast_generation.values
    bat = problem.battery
    q, p, c, d = _repair(q, p, c, d, Y, P, problem.pricing.buy.values,
                         problem.pricing.sell.values, bat.efficiency)

    energy = np.empty(H)
    e = bat.initial_energy
    for h in range(H):
        # clipping only absorbs rounding; the LP already enforces the bounds
        e = min(max(e + bat.efficiency * c[h] - d[h], 0.0), bat.capacity)
        energy[h] = e

    plan = DayAheadPlan(q=q, sold_fraction=p, battery_rate=c - d, energy=energy,
                        planned_cost=0.0, charge=c, discharge=d)
    total = plan_cost(plan, problem.pricing, problem.forecast_generation)
    if not math.isfinite(total):
        raise SolverFailure("non-finite plan cost")
    object.__setattr__(plan, "planned_cost", total)
    return plan


def balance_residuals(plan: DayAheadPlan, problem: OptimizationProblem) -> dict[str, float]:
    """Largest violation (Wh or dimensionless) of each plan constraint; all are 0 when feasible."""
    Y = problem.consumption.values
    P = problem.forecast_generation.values
    bat = problem.battery
    B = plan.battery_rate
    prev = np.concatenate([[bat.initial_energy], plan.energy[:-1]])
    stepped = np.where(B >= 0, prev + bat.efficiency * B, prev + B)
    return {
        "balance": float(np.abs(plan.q - (Y + B - (1 - plan.sold_fraction) * P)).max()),
        "q_nonneg": float(max(0.0, -plan.q.min())),
        "fraction": float(max(0.0, -plan.sold_fraction.min(), plan.sold_fraction.max() - 1.0)),
        "rate": float(max(0.0, (-bat.max_discharge - B).max(), (B - bat.max_charge).max())),
        "energy_bounds": float(max(0.0, -plan.energy.min(), (plan.energy - bat.capacity).max())),
        "storage": float(np.abs(plan.energy - stepped).max()),
        "export": float(max(0.0, (-B - Y).max())),
    }
