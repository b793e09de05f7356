import csv
import json

import numpy as np
import pytest

from hems_sa.exceptions import ConfigError
from hems_sa.experiment import (
    CaseSetup,
    ExperimentConfig,
    ScenarioVector,
    evaluate_case,
    evaluate_scenario,
    map_unit_to_scenario,
    run_experiment,
    write_outputs,
)
from hems_sa.profiles import (
    BUNDLED_NETLOAD_AFTER_16,
    HourlyProfile,
    irradiance_to_power,
    last_surplus_hour,
    positive_netload_after,
)
from hems_sa.sensitivity import saltelli_sample


def small_config(**kw):
    kw.setdefault("base_sample_count", 8)
    return ExperimentConfig(**kw)


class TestScenarioMap:
    def test_midpoint_is_mean_scenario(self, bundled):
        _, irradiance, _ = bundled
        s = map_unit_to_scenario(np.full(16, 0.5), irradiance, (5000, 8000), 0.3)
        np.testing.assert_allclose(s.irradiance, irradiance.values[4:19])
        assert s.capacity == 6500

    def test_upper_corner(self):
        mean = HourlyProfile(np.full(24, 800.0), "irradiance")
        s = map_unit_to_scenario(np.ones(16), mean, (0, 10), 0.3)
        np.testing.assert_allclose(s.irradiance, 1040.0)
        assert s.capacity == 10

    def test_night_hours_stay_dark(self, bundled):
        _, irradiance, _ = bundled
        s = map_unit_to_scenario(np.ones(16), irradiance, (0, 1), 0.3)
        assert s.irradiance[0] == 0.0  # hour 5


class TestEvaluateScenario:
    def test_mean_scenario_realizes_plan(self):
        config = small_config()
        setup = CaseSetup.build(config, 0)
        s = map_unit_to_scenario(np.full(16, 0.5), setup.mean_irradiance, (5000, 8000), 0.3)
        plan = setup.plan(s.capacity)
        assert evaluate_scenario(s, config, 0) == pytest.approx(plan.planned_cost, rel=1e-6)

    def test_zero_error_ignores_irradiance_draw(self):
        config = small_config(error_halfwidth=0.0)
        setup = CaseSetup.build(config, 0)
        costs = {evaluate_scenario(map_unit_to_scenario(u, setup.mean_irradiance, (6000, 6000), 0.0),
                                   config, 0)
                 for u in np.random.default_rng(3).random((5, 16))}
        assert len(costs) == 1

    def test_bigger_battery_costs_no_more(self, bundled):
        _, irradiance, _ = bundled
        config = small_config()
        irr = irradiance.values[4:19]
        assert (evaluate_scenario(ScenarioVector(irr, 35000), config, 0)
                <= evaluate_scenario(ScenarioVector(irr, 6500), config, 0) + 1e-12)

    def test_replan_is_a_lower_bound(self):
        rows = saltelli_sample(16, 4).rows
        fixed = evaluate_case(CaseSetup.build(small_config(), 0), rows, (5000, 8000), 0.3)
        replan = evaluate_case(CaseSetup.build(small_config(mode="replan"), 0), rows, (5000, 8000), 0.3)
        # perfect foresight can only help
        assert np.all(replan <= fixed + 1e-9)

    def test_cached_plans_match_direct_evaluation(self):
        config = small_config()
        setup = CaseSetup.build(config, 1)
        rows = saltelli_sample(16, 4).rows[:40]
        cached = evaluate_case(setup, rows, (9000, 12000), 0.3)
        direct = [evaluate_scenario(map_unit_to_scenario(u, setup.mean_irradiance, (9000, 12000), 0.3,
                                                         config.window), config, 1) for u in rows]
        np.testing.assert_array_equal(cached, direct)


class TestRunExperiment:
    def test_evaluation_count(self):
        config = small_config(capacity_classes=((5000, 8000),))
        result = run_experiment(config, workers=1)
        assert result.cases[0].evaluations == 8 * (2 * 16 + 2) == 272
        assert result.evaluation_count == 272

    def test_capacity_relevance(self, bundled):
        consumption, _, generation = bundled
        oracle = positive_netload_after(consumption, generation, last_surplus_hour(consumption, generation))
        assert oracle == pytest.approx(BUNDLED_NETLOAD_AFTER_16)
        config = small_config(base_sample_count=64, capacity_classes=((5000, 8000), (30000, 40000)))
        below, above = run_experiment(config, workers=1).cases
        assert below.result.total_order[-1] > 0.1
        assert above.result.total_order[-1] < 0.02

    def test_night_hour_has_no_influence(self):
        config = small_config(base_sample_count=16, capacity_classes=((5000, 8000),))
        res = run_experiment(config, workers=1).cases[0].result
        # bundled irradiance is zero at hour 5, so perturbing it changes nothing
        assert res.first_order[0] == 0.0 and res.total_order[0] == 0.0

    def test_constant_case_is_flagged(self, tmp_path):
        config = small_config(error_halfwidth=0.0, capacity_classes=((7000, 7000), (5000, 8000)))
        result = run_experiment(config, workers=1)
        flat, ok = result.cases
        assert flat.status == "variance_zero" and flat.result is None
        assert ok.status == "ok"
        write_outputs(result, tmp_path)
        rows = list(csv.reader(open(tmp_path / "total_order.csv")))
        assert rows[1][3:] == [""] * 16
        assert not (tmp_path / "second_order_0_7000-7000.csv").exists()
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["cases"][0]["status"] == "variance_zero"

    def test_parallel_is_bit_identical(self):
        config = small_config(capacity_classes=((5000, 8000),), shift_cases=(0, 2))
        serial = run_experiment(config, workers=1)
        parallel = run_experiment(config, workers=2)
        for a, b in zip(serial.cases, parallel.cases):
            np.testing.assert_array_equal(a.outputs, b.outputs)
            assert a.result.to_json() == b.result.to_json()

    def test_output_files(self, tmp_path):
        config = small_config(capacity_classes=((5000, 8000), (9000, 12000)), shift_cases=(-1, 0))
        result = run_experiment(config, workers=1)
        written = write_outputs(result, tmp_path)
        names = sorted(p.name for p in written)
        assert names == sorted(["first_order.csv", "total_order.csv", "summary.json",
                                "second_order_-1_5000-8000.csv", "second_order_-1_9000-12000.csv",
                                "second_order_0_5000-8000.csv", "second_order_0_9000-12000.csv"])
        rows = list(csv.reader(open(tmp_path / "first_order.csv")))
        assert rows[0] == ["shift", "capacity_lo", "capacity_hi", *config.labels]
        assert rows[0][3] == "h05" and rows[0][-1] == "capacity"
        assert [r[:3] for r in rows[1:]] == [["-1", "5000", "8000"], ["-1", "9000", "12000"],
                                             ["0", "5000", "8000"], ["0", "9000", "12000"]]
        np.testing.assert_array_equal([float(v) for v in rows[1][3:]], result.cases[0].result.first_order)
        matrix = np.array([r[1:] for r in csv.reader(open(tmp_path / "second_order_0_5000-8000.csv"))][1:],
                          dtype=float)
        np.testing.assert_array_equal(matrix, matrix.T)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["evaluations_per_case"] == 272 and summary["evaluation_count"] == 4 * 272


class TestConfig:
    def test_defaults(self):
        config = ExperimentConfig()
        assert config.d == 16 and config.labels[0] == "h05" and len(config.labels) == 16
        assert config.battery.efficiency == 0.95

    def test_bundled_json(self, data_dir):
        config = ExperimentConfig.from_json(data_dir / "full.json")
        assert config.base_sample_count == 1000
        assert config.shift_cases == (-2, -1, 0, 1, 2)
        assert len(config.capacity_classes) == 4

    @pytest.mark.parametrize("data", [
        {"bogus": 1},
        {"error_halfwidth": -0.1},
        {"base_sample_count": 1},
        {"base_sample_count": 2.5},
        {"irradiance_hours": [0, 19]},
        {"capacity_classes": [[8000, 5000]]},
        {"shift_cases": [13]},
        {"mode": "oracle"},
        {"battery": {"capacity": 5}},
        {"battery": {"efficiency": 0}},
        {"pricing": {"buy": "nope.csv"}},
    ])
    def test_rejects(self, data, tmp_path):
        with pytest.raises((ConfigError, OSError)):
            ExperimentConfig.from_dict(data, tmp_path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json(path)

    def test_shifted_forecast(self):
        setup = CaseSetup.build(small_config(), -2)
        base = CaseSetup.build(small_config(), 0)
        np.testing.assert_array_equal(setup.forecast.values[:-2], base.forecast.values[2:])
        np.testing.assert_array_equal(setup.forecast.values,
                                      irradiance_to_power(setup.mean_irradiance, setup.panel).values)
