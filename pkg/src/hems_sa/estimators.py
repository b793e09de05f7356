"""scikit-learn style wrapper around the planner and the dispatch simulator."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import N_HOURS, check_hourly
from .exceptions import DataError
from .optimizer import BatterySpec, OptimizationProblem, solve_day_ahead
from .profiles import BUY_PRICE, SELL_PRICE, HourlyProfile, PricingScheme
from .simulator import execute_plan


def _profile(x, kind) -> HourlyProfile:
    if isinstance(x, HourlyProfile):
        if x.kind != kind:
            raise DataError(f"expected a {kind} profile, got {x.kind}")
        return x
    return HourlyProfile(check_hourly(x, kind), kind)


def _price(x, kind) -> HourlyProfile:
    if np.ndim(x) == 0:
        return HourlyProfile.constant(float(x), kind)
    return _profile(x, kind)


class DayAheadScheduler(BaseEstimator):
    """Plan a day from a generation forecast, then cost realised generation scenarios.

    ``fit(consumption, forecast)`` solves the day-ahead problem;
    ``predict(X)`` maps each row of realised generation (shape ``(n, 24)``)
    to the realised daily cost in EUR when the fitted plan is executed.
    """

    def __init__(self, capacity=0.0, max_charge=0.0, max_discharge=0.0, efficiency=1.0,
                 initial_energy=0.0, buy_price=BUY_PRICE, sell_price=SELL_PRICE):
        self.capacity = capacity
        self.max_charge = max_charge
        self.max_discharge = max_discharge
        self.efficiency = efficiency
        self.initial_energy = initial_energy
        self.buy_price = buy_price
        self.sell_price = sell_price

    def _battery(self) -> BatterySpec:
        return BatterySpec(self.capacity, self.max_charge, self.max_discharge, self.efficiency,
                           self.initial_energy)

    def _pricing(self) -> PricingScheme:
        return PricingScheme(_price(self.buy_price, "buy_price"), _price(self.sell_price, "sell_price"))

    def fit(self, consumption, forecast):
        self.battery_ = self._battery()
        self.pricing_ = self._pricing()
        self.consumption_ = _profile(consumption, "consumption")
        self.forecast_ = _profile(forecast, "generation")
        problem = OptimizationProblem(self.consumption_, self.forecast_, self.pricing_, self.battery_)
        self.plan_ = solve_day_ahead(problem)
        self.planned_cost_ = self.plan_.planned_cost
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "plan_")
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != N_HOURS:
            raise DataError(f"expected {N_HOURS} columns of hourly generation, got {X.shape[1]}")
        return np.array([
            execute_plan(self.plan_, HourlyProfile(row, "generation"), self.consumption_,
                         self.pricing_, self.battery_).realized_cost
            for row in X
        ])

    def score(self, X) -> float:
        """Negative mean realised cost (higher is better)."""
        return -float(np.mean(self.predict(X)))
