"""Sensitivity of a home energy management system's daily cost to PV forecast errors."""

from .estimators import DayAheadScheduler
from .exceptions import (
    ConfigError,
    DataError,
    DimensionUnsupported,
    HemsError,
    Infeasible,
    MalformedFile,
    NegativeValue,
    OffsetTooLarge,
    PlanMismatch,
    SolverFailure,
    VarianceZero,
)
from .experiment import ExperimentConfig, map_unit_to_scenario, evaluate_scenario, run_experiment
from .optimizer import BatterySpec, DayAheadPlan, OptimizationProblem, battery_step, plan_cost, solve_day_ahead
from .profiles import (
    HourlyProfile,
    PanelSpec,
    PricingScheme,
    irradiance_to_power,
    load_profile,
    positive_netload_after,
    shift_profile,
)
from .sensitivity import SaltelliDesign, SensitivityResult, SobolAnalyzer, estimate_indices, saltelli_sample
from .simulator import RealizedOutcome, cost_gap, execute_plan
from .sobol import SobolGenerator, sobol_points

__version__ = "0.1.0"
