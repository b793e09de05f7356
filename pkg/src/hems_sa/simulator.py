"""Execute a day-ahead plan against realised generation and settle with the grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import N_HOURS
from .exceptions import PlanMismatch
from .optimizer import KWH, BatterySpec, DayAheadPlan, battery_step
from .profiles import HourlyProfile, PricingScheme


@dataclass(frozen=True)
class RealizedOutcome:
    bought: np.ndarray  # Wh
    sold: np.ndarray  # Wh
    executed_battery_rate: np.ndarray  # Wh, > 0 charge
    energy: np.ndarray  # Wh
    realized_cost: float  # EUR

    def to_dict(self) -> dict:
        return {
            "realized_cost": self.realized_cost,
            "hours": [
                {
                    "hour": h + 1,
                    "bought": float(self.bought[h]),
                    "sold": float(self.sold[h]),
                    "executed_battery_rate": float(self.executed_battery_rate[h]),
                    "energy": float(self.energy[h]),
                }
                for h in range(len(self.bought))
            ],
        }


def execute_plan(
    plan: DayAheadPlan,
    realized_generation: HourlyProfile,
    consumption: HourlyProfile,
    pricing: PricingScheme,
    battery: BatterySpec,
) -> RealizedOutcome:
    """Hold the planned battery schedule (clamped to what is physically possible)
    and buy or sell whatever the realised energy balance leaves over.
    """
    if len(plan) != N_HOURS:
        raise PlanMismatch(f"plan covers {len(plan)} hours, expected {N_HOURS}")

    Y = consumption.values
    P = realized_generation.values
    eta = battery.efficiency
    rates = plan.battery_rate.tolist()

    executed = np.zeros(N_HOURS)
    energy = np.zeros(N_HOURS)
    net = np.zeros(N_HOURS)
    e = battery.initial_energy
    for h in range(N_HOURS):
        rate = rates[h]
        if rate > 0:
            rate = min(rate, battery.max_charge, max(battery.capacity - e, 0.0) / eta)
        elif rate < 0:
            rate = -min(-rate, battery.max_discharge, e, Y[h])
        e = battery_step(e, rate, eta)
        executed[h] = rate
        energy[h] = e
        # a charge of c draws c from the bus; a discharge of d supplies d
        net[h] = Y[h] + rate - P[h]

    bought = np.maximum(net, 0.0)
    sold = np.maximum(-net, 0.0)
    cost = (float(np.dot(bought, pricing.buy.values)) - float(np.dot(sold, pricing.sell.values))) / KWH
    return RealizedOutcome(bought, sold, executed, energy, cost)


def cost_gap(plan: DayAheadPlan, outcome: RealizedOutcome) -> float:
    """Realised minus planned cost in EUR."""
    return outcome.realized_cost - plan.planned_cost
