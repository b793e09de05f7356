"""Sensitivity study of daily cost to hourly irradiance errors and battery capacity.

Each (shift case, capacity class) pair is one study: a Saltelli design over
the irradiance window hours plus capacity is mapped to physical scenarios,
every scenario is planned and/or executed, and the outputs are reduced to
Sobol indices.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, VarianceZero
from .optimizer import BatterySpec, DayAheadPlan, OptimizationProblem, solve_day_ahead
from .profiles import (
    BUNDLED_PANEL_AREA,
    BUY_PRICE,
    PERFORMANCE_RATIO,
    SELL_PRICE,
    HourlyProfile,
    PanelSpec,
    PricingScheme,
    bundled_profiles,
    irradiance_to_power,
    load_profile,
    shift_profile,
)
from .sensitivity import SensitivityResult, analyze, design_size, saltelli_sample
from .simulator import execute_plan

log = logging.getLogger(__name__)

MODES = ("fixed-plan", "replan")
DEFAULT_CAPACITY_CLASSES = ((5000.0, 8000.0), (9000.0, 12000.0), (15000.0, 20000.0), (30000.0, 40000.0))

_KEYS = {
    "base_sample_count", "irradiance_hours", "error_halfwidth", "capacity_classes",
    "shift_cases", "profiles", "panel", "pricing", "battery", "mode", "workers",
}


@dataclass(frozen=True)
class ExperimentConfig:
    base_sample_count: int = 1000
    irradiance_hours: tuple[int, int] = (5, 19)
    error_halfwidth: float = 0.3
    capacity_classes: tuple[tuple[float, float], ...] = DEFAULT_CAPACITY_CLASSES
    shift_cases: tuple[int, ...] = (0,)
    consumption: HourlyProfile = None
    irradiance: HourlyProfile = None
    panel: PanelSpec = PanelSpec(BUNDLED_PANEL_AREA, PERFORMANCE_RATIO)
    pricing: PricingScheme = field(default_factory=PricingScheme.flat)
    battery: BatterySpec = BatterySpec(0.0, 5000.0, 5000.0, 0.95, 0.0)
    mode: str = "fixed-plan"
    workers: int | None = None

    def __post_init__(self):
        if self.consumption is None or self.irradiance is None:
            cons, irr = bundled_profiles()
            object.__setattr__(self, "consumption", self.consumption or cons)
            object.__setattr__(self, "irradiance", self.irradiance or irr)
        if self.consumption.kind != "consumption" or self.irradiance.kind != "irradiance":
            raise ConfigError("profiles must be a consumption and an irradiance profile")
        if int(self.base_sample_count) < 2:
            raise ConfigError("base_sample_count must be >= 2")
        lo, hi = self.irradiance_hours
        if not 1 <= lo <= hi <= 24:
            raise ConfigError(f"irradiance_hours must satisfy 1 <= start <= end <= 24, got {lo}..{hi}")
        if not 0.0 <= self.error_halfwidth <= 1.0:
            raise ConfigError(f"error_halfwidth must lie in [0, 1], got {self.error_halfwidth}")
        if not self.capacity_classes:
            raise ConfigError("at least one capacity class is required")
        for c_lo, c_hi in self.capacity_classes:
            if not 0.0 <= c_lo <= c_hi:
                raise ConfigError(f"capacity class ({c_lo}, {c_hi}) must satisfy 0 <= lo <= hi")
        if not self.shift_cases:
            raise ConfigError("at least one shift case is required")
        for s in self.shift_cases:
            if abs(int(s)) > 12:
                raise ConfigError(f"shift {s} exceeds 12 hours")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.workers is not None and int(self.workers) < 1:
            raise ConfigError("workers must be >= 1")

    @property
    def window(self) -> np.ndarray:
        """0-based indices of the perturbed hours."""
        lo, hi = self.irradiance_hours
        return np.arange(lo - 1, hi)

    @property
    def d(self) -> int:
        return len(self.window) + 1

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f"h{h + 1:02d}" for h in self.window) + ("capacity",)

    @classmethod
    def from_dict(cls, data: dict, base_dir=".") -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - _KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        base_dir = Path(base_dir)
        kw = {}
        try:
            if "base_sample_count" in data:
                kw["base_sample_count"] = _int(data["base_sample_count"], "base_sample_count")
            if "irradiance_hours" in data:
                lo, hi = data["irradiance_hours"]
                kw["irradiance_hours"] = (_int(lo, "irradiance_hours"), _int(hi, "irradiance_hours"))
            if "error_halfwidth" in data:
                kw["error_halfwidth"] = float(data["error_halfwidth"])
            if "capacity_classes" in data:
                kw["capacity_classes"] = tuple((float(lo), float(hi)) for lo, hi in data["capacity_classes"])
            if "shift_cases" in data:
                kw["shift_cases"] = tuple(_int(s, "shift_cases") for s in data["shift_cases"])
            if "profiles" in data:
                prof = dict(data["profiles"])
                extra = set(prof) - {"consumption", "irradiance"}
                if extra:
                    raise ConfigError(f"unknown profile keys: {sorted(extra)}")
                if "consumption" in prof:
                    kw["consumption"] = load_profile(base_dir / prof["consumption"], "consumption")
                if "irradiance" in prof:
                    kw["irradiance"] = load_profile(base_dir / prof["irradiance"], "irradiance")
            if "panel" in data:
                kw["panel"] = PanelSpec(**_only(data["panel"], {"area", "performance_ratio"}, "panel"))
            if "pricing" in data:
                kw["pricing"] = parse_pricing(data["pricing"], base_dir)
            if "battery" in data:
                fields = {"max_charge", "max_discharge", "efficiency", "initial_energy"}
                vals = _only(data["battery"], fields, "battery")
                # capacity is sampled per scenario; this is only a template
                kw["battery"] = BatterySpec(vals.get("initial_energy", 0.0), **vals)
            if "mode" in data:
                kw["mode"] = str(data["mode"])
            if "workers" in data and data["workers"] is not None:
                kw["workers"] = _int(data["workers"], "workers")
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cls(**kw)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data, base_dir=path.parent)


def _int(value, name) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    return int(value)


def _only(obj, allowed, name) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{name} must be an object")
    extra = set(obj) - allowed
    if extra:
        raise ConfigError(f"unknown {name} keys: {sorted(extra)}")
    return {k: float(v) for k, v in obj.items()}


def parse_pricing(obj, base_dir=".") -> PricingScheme:
    """Pricing from ``{"buy": x, "sell": y}``; each side a number, a 24-list or a CSV path."""
    if not isinstance(obj, dict):
        raise ConfigError("pricing must be an object")
    extra = set(obj) - {"buy", "sell"}
    if extra:
        raise ConfigError(f"unknown pricing keys: {sorted(extra)}")

    def side(value, default, kind):
        if value is None:
            return HourlyProfile.constant(default, kind)
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return HourlyProfile.constant(value, kind)
        if isinstance(value, list):
            return HourlyProfile(np.asarray(value, dtype=float), kind)
        if isinstance(value, str):
            return load_profile(Path(base_dir) / value, kind)
        raise ConfigError(f"unsupported {kind} specification {value!r}")

    return PricingScheme(side(obj.get("buy"), BUY_PRICE, "buy_price"),
                         side(obj.get("sell"), SELL_PRICE, "sell_price"))


@dataclass(frozen=True)
class ScenarioVector:
    irradiance: np.ndarray  # W/m2 per window hour
    capacity: float  # Wh


def map_unit_to_scenario(u, mean_irradiance: HourlyProfile, capacity_class, epsilon: float,
                         window=None) -> ScenarioVector:
    """Affine map of a unit-cube point to window irradiances and a battery capacity.

    The last coordinate drives capacity; the others scale the mean irradiance
    of each window hour uniformly within ``+-epsilon`` (relative).
    """
    u = np.asarray(u, dtype=np.float64)
    if window is None:
        window = np.arange(4, 4 + u.size - 1)
    mu = mean_irradiance.values[window]
    irr = np.maximum(0.0, mu * (1.0 + epsilon * (2.0 * u[:-1] - 1.0)))
    lo, hi = capacity_class
    return ScenarioVector(irr, lo + (hi - lo) * float(u[-1]))


@dataclass(frozen=True)
class CaseSetup:
    """Everything needed to evaluate scenarios of one (shift, capacity class) case."""

    consumption: HourlyProfile
    mean_irradiance: HourlyProfile  # already shifted
    forecast: HourlyProfile  # generation from the shifted mean
    pricing: PricingScheme
    battery: BatterySpec
    panel: PanelSpec
    window: np.ndarray
    mode: str

    @classmethod
    def build(cls, config: ExperimentConfig, shift: int) -> "CaseSetup":
        mean_irr = shift_profile(config.irradiance, shift)
        return cls(config.consumption, mean_irr, irradiance_to_power(mean_irr, config.panel),
                   config.pricing, config.battery, config.panel, config.window, config.mode)

    def realized_generation(self, irradiance_window) -> HourlyProfile:
        irr = np.zeros(24)
        irr[self.window] = irradiance_window
        return irradiance_to_power(HourlyProfile(irr, "irradiance"), self.panel)

    def plan(self, capacity: float, generation: HourlyProfile | None = None) -> DayAheadPlan:
        problem = OptimizationProblem(self.consumption, generation or self.forecast, self.pricing,
                                      self.battery.with_capacity(capacity))
        return solve_day_ahead(problem)

    def execute(self, plan: DayAheadPlan, scenario: ScenarioVector) -> float:
        outcome = execute_plan(plan, self.realized_generation(scenario.irradiance), self.consumption,
                               self.pricing, self.battery.with_capacity(scenario.capacity))
        return outcome.realized_cost

    def evaluate(self, scenario: ScenarioVector, plan: DayAheadPlan | None = None) -> float:
        if self.mode == "replan":
            return self.plan(scenario.capacity, self.realized_generation(scenario.irradiance)).planned_cost
        if plan is None:
            plan = self.plan(scenario.capacity)
        return self.execute(plan, scenario)


def evaluate_scenario(s: ScenarioVector, config: ExperimentConfig, shift_case: int) -> float:
    """Daily cost (EUR) of one scenario."""
    return CaseSetup.build(config, shift_case).evaluate(s)


# --- orchestration ----------------------------------------------------------

def _plan_task(args):
    setup, capacity = args
    return setup.plan(capacity)


def _replan_task(args):
    setup, scenario = args
    return setup.evaluate(scenario)


def _chunked(items, workers):
    return max(1, len(items) // (8 * workers))


@dataclass
class CaseResult:
    shift: int
    capacity_class: tuple[float, float]
    evaluations: int
    result: SensitivityResult | None = None
    status: str = "ok"
    message: str = ""
    outputs: np.ndarray | None = field(default=None, repr=False)

    @property
    def key(self) -> str:
        lo, hi = self.capacity_class
        return f"{self.shift}_{_fmt_capacity(lo)}-{_fmt_capacity(hi)}"


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    cases: list[CaseResult]
    wall_time: float

    @property
    def evaluation_count(self) -> int:
        return sum(c.evaluations for c in self.cases)


def evaluate_case(setup: CaseSetup, unit_rows: np.ndarray, capacity_class, epsilon: float,
                  pool: ProcessPoolExecutor | None = None, workers: int = 1) -> np.ndarray:
    """Model outputs for every design row, in row order."""
    scenarios = [map_unit_to_scenario(u, setup.mean_irradiance, capacity_class, epsilon, setup.window)
                 for u in unit_rows]
    mapper = pool.map if pool is not None else map

    if setup.mode == "replan":
        tasks = [(setup, s) for s in scenarios]
        kw = {"chunksize": _chunked(tasks, workers)} if pool is not None else {}
        return np.fromiter(mapper(_replan_task, tasks, **kw), dtype=np.float64, count=len(tasks))

    # The forecast is fixed per case, so a plan depends only on capacity;
    # a Saltelli design holds just 2N distinct capacity values.
    capacities = list(dict.fromkeys(s.capacity for s in scenarios))
    tasks = [(setup, c) for c in capacities]
    kw = {"chunksize": _chunked(tasks, workers)} if pool is not None else {}
    plans = dict(zip(capacities, mapper(_plan_task, tasks, **kw)))
    return np.array([setup.execute(plans[s.capacity], s) for s in scenarios])


def run_experiment(config: ExperimentConfig, workers: int | None = None, progress=None) -> ExperimentResult:
    """Run every (shift, capacity class) case and estimate its Sobol indices."""
    workers = workers or config.workers or os.cpu_count() or 1
    start = time.perf_counter()
    n, d = config.base_sample_count, config.d
    design = saltelli_sample(d, n)
    cases = []

    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for shift in config.shift_cases:
            setup = CaseSetup.build(config, shift)
            for cls in config.capacity_classes:
                outputs = evaluate_case(setup, design.rows, cls, config.error_halfwidth, pool, workers)
                case = CaseResult(shift, cls, evaluations=len(outputs), outputs=outputs)
                try:
                    case.result = analyze(design, outputs, labels=config.labels)
                except VarianceZero as exc:
                    case.status, case.message = "variance_zero", str(exc)
                    log.warning("case %s: %s", case.key, exc)
                cases.append(case)
                if progress is not None:
                    progress(case)
    finally:
        if pool is not None:
            pool.shutdown()
    return ExperimentResult(config, cases, time.perf_counter() - start)


# --- output -----------------------------------------------------------------

def _fmt_capacity(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _fmt(x: float) -> str:
    return repr(float(x))


def write_outputs(result: ExperimentResult, out_dir) -> list[Path]:
    """Write the index tables, second-order matrices and summary into `out_dir`."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    labels = cfg.labels
    written = []

    for name, attr in (("first_order.csv", "first_order"), ("total_order.csv", "total_order")):
        path = out_dir / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["shift", "capacity_lo", "capacity_hi", *labels])
            for case in result.cases:
                lo, hi = case.capacity_class
                cells = ([_fmt(v) for v in getattr(case.result, attr)] if case.result is not None
                         else [""] * len(labels))
                w.writerow([case.shift, _fmt_capacity(lo), _fmt_capacity(hi), *cells])
        written.append(path)

    for case in result.cases:
        if case.result is None:
            continue
        path = out_dir / f"second_order_{case.key}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["", *labels])
            for label, row in zip(labels, case.result.second_order):
                w.writerow([label, *(_fmt(v) for v in row)])
        written.append(path)

    summary = {
        "base_sample_count": cfg.base_sample_count,
        "d": cfg.d,
        "labels": list(labels),
        "error_halfwidth": cfg.error_halfwidth,
        "mode": cfg.mode,
        "evaluations_per_case": design_size(cfg.d, cfg.base_sample_count),
        "evaluation_count": result.evaluation_count,
        "cases": [
            {
                "shift": c.shift,
                "capacity_class": list(c.capacity_class),
                "status": c.status,
                "message": c.message,
                "evaluations": c.evaluations,
                "indices": c.result.to_dict() if c.result is not None else None,
            }
            for c in result.cases
        ],
    }
    path = out_dir / "summary.json"
    path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    written.append(path)
    return written
