"""Command line entry point: ``hems-sa optimize | simulate | sa | sobol-test``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 computation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .exceptions import ComputationError, ConfigError, DataError
from .experiment import ExperimentConfig, parse_pricing, run_experiment, write_outputs
from .optimizer import BatterySpec, OptimizationProblem, solve_day_ahead
from .profiles import load_profile
from .sensitivity import analyze, ishigami, ishigami_indices, linear_model, saltelli_sample
from .simulator import cost_gap, execute_plan

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_COMPUTE = 0, 1, 2, 3
OUT_DIR_ENV = "HEMS_SA_OUT_DIR"
DEFAULT_OUT_DIR = "hems_sa_out"

LINEAR_TOL = 0.02
ISHIGAMI_TOL = 0.03
ISHIGAMI_MIN_TOTAL_3 = 0.15
MEANINGFUL_N = 1024


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _out_dir(args) -> Path:
    path = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_system_config(path):
    """Battery and pricing for ``optimize``/``simulate``."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - {"battery", "pricing"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    battery = data.get("battery", {})
    allowed = {"capacity", "max_charge", "max_discharge", "efficiency", "initial_energy"}
    if not isinstance(battery, dict) or set(battery) - allowed:
        raise ConfigError(f"battery must be an object with keys from {sorted(allowed)}")
    try:
        battery = BatterySpec(**{k: float(v) for k, v in battery.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    pricing = parse_pricing(data.get("pricing", {}), path.parent)
    return battery, pricing


def _problem(args) -> OptimizationProblem:
    consumption = load_profile(args.consumption, "consumption")
    generation = load_profile(args.generation, "generation")
    battery, pricing = load_system_config(args.config)
    return OptimizationProblem(consumption, generation, pricing, battery)


def _print_plan(plan, out=sys.stdout):
    print(f"{'hour':>4} {'buy Wh':>12} {'sold frac':>10} {'battery Wh':>12} {'stored Wh':>12}", file=out)
    for h in range(len(plan)):
        print(f"{h + 1:>4} {plan.q[h]:>12.4f} {plan.sold_fraction[h]:>10.4f} "
              f"{plan.battery_rate[h]:>12.4f} {plan.energy[h]:>12.4f}", file=out)


def cmd_optimize(args) -> int:
    problem = _problem(args)
    plan = solve_day_ahead(problem)
    _print_plan(plan)
    print(f"planned cost: {plan.planned_cost:.4f} EUR")
    _write_json(_out_dir(args) / "plan.json", plan.to_dict())
    return EXIT_OK


def cmd_simulate(args) -> int:
    problem = _problem(args)
    realized = load_profile(args.realized, "generation")
    plan = solve_day_ahead(problem)
    outcome = execute_plan(plan, realized, problem.consumption, problem.pricing, problem.battery)
    gap = cost_gap(plan, outcome)
    print(f"planned cost:  {plan.planned_cost:.4f} EUR")
    print(f"realized cost: {outcome.realized_cost:.4f} EUR")
    print(f"cost gap:      {gap:.4f} EUR")
    _write_json(_out_dir(args) / "outcome.json",
                {"plan": plan.to_dict(), "outcome": outcome.to_dict(), "cost_gap": gap})
    return EXIT_OK


def cmd_sa(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    out_dir = _out_dir(args)

    def report(case):
        if case.result is None:
            print(f"shift {case.shift:+d} class {case.key}: {case.status} ({case.message})")
            return
        total = case.result.total_order
        top = np.argsort(-total, kind="stable")[:3]
        ranked = ", ".join(f"{case.result.labels[i]}={total[i]:.4f}" for i in top)
        print(f"shift {case.shift:+d} capacity {case.capacity_class[0]:g}-{case.capacity_class[1]:g} Wh: {ranked}")

    result = run_experiment(config, workers=args.workers, progress=report)
    write_outputs(result, out_dir)
    print(f"{result.evaluation_count} evaluations in {result.wall_time:.1f} s; results in {out_dir}")
    return EXIT_OK


def _check(name, estimate, target, tol, rows):
    ok = abs(estimate - target) <= tol
    rows.append((name, estimate, target, f"+-{tol}", ok))


def cmd_sobol_test(args) -> int:
    n = args.n
    if n < 2:
        print("error: --n must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    if n < MEANINGFUL_N:
        print(f"warning: N={n} is below {MEANINGFUL_N}; tolerances are not meaningful at this size",
              file=sys.stderr)
    rows = []

    design = saltelli_sample(2, n)
    res = analyze(design, linear_model(design.rows))
    _check("linear S1", res.first_order[0], 0.2, LINEAR_TOL, rows)
    _check("linear S2", res.first_order[1], 0.8, LINEAR_TOL, rows)
    _check("linear S12", res.second_order[0, 1], 0.0, LINEAR_TOL, rows)

    design = saltelli_sample(3, n)
    res = analyze(design, ishigami(design.rows))
    ref = ishigami_indices()
    for i in range(3):
        _check(f"ishigami S{i + 1}", res.first_order[i], ref["first_order"][i], ISHIGAMI_TOL, rows)
    for i in range(3):
        _check(f"ishigami ST{i + 1}", res.total_order[i], ref["total_order"][i], ISHIGAMI_TOL, rows)
    rows.append(("ishigami ST3 interaction", res.total_order[2], ISHIGAMI_MIN_TOTAL_3,
                 f">{ISHIGAMI_MIN_TOTAL_3}", res.total_order[2] > ISHIGAMI_MIN_TOTAL_3))

    print(f"{'check':<26} {'estimate':>9} {'analytic':>9} {'tol':>7}  result")
    for name, est, ref_val, tol, ok in rows:
        print(f"{name:<26} {est:>9.4f} {ref_val:>9.4f} {tol:>7}  {'PASS' if ok else 'FAIL'}")
    failed = sum(not r[-1] for r in rows)
    if failed:
        print(f"{failed} check(s) failed at N={n}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hems-sa", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def plan_inputs(p):
        p.add_argument("--consumption", required=True, help="consumption CSV (hour,W)")
        p.add_argument("--generation", required=True, help="forecast generation CSV (hour,W)")
        p.add_argument("--config", required=True, help="JSON with battery and pricing")
        p.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or {DEFAULT_OUT_DIR})")

    p = sub.add_parser("optimize", help="solve the day-ahead plan")
    plan_inputs(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="plan, then execute against a realized generation profile")
    plan_inputs(p)
    p.add_argument("--realized", required=True, help="realized generation CSV (hour,W)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sa", help="run the sensitivity experiment")
    p.add_argument("--config", required=True, help="experiment JSON")
    p.add_argument("--workers", type=int, help="worker processes (default: CPU count)")
    p.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or {DEFAULT_OUT_DIR})")
    p.set_defaults(func=cmd_sa)

    p = sub.add_parser("sobol-test", help="check the estimators on analytic test functions")
    p.add_argument("--n", type=int, default=4096, help="base sample count (default 4096)")
    p.set_defaults(func=cmd_sobol_test)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", None) is not None and args.workers < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ComputationError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
