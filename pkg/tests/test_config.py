"""JSON config parsing, serialization, and round-trip tests."""
from __future__ import annotations

import json

import pytest

from virosim.config import (
    ConfigError,
    criterion_to_json,
    distribution_to_json,
    experiment_to_json,
    init_to_json,
    integrator_to_json,
    params_to_json,
    parse_criterion,
    parse_distribution,
    parse_experiment,
    parse_init,
    parse_integrator,
    parse_params,
    parse_scenario,
    parse_simulation,
    parse_state,
    scenario_to_json,
    simulation_to_json,
    state_to_json,
)
from virosim.integrate import IntegratorConfig, Method
from virosim.model import Parameters, State
from virosim.montecarlo import AsymptoticR, FiniteTime, InitialConditionGrid
from virosim.sampling import (
    Constant,
    LambdaRule,
    Triangular,
    TruncatedNormal,
    Uniform,
    truncated_normal_scenario,
    uniform_triangular_scenario,
)

MEANS_DOC = {
    "lambda": 0.1089, "mu": 0.01089, "k": 1.179e-3,
    "delta": 0.3660, "p": 1427.0, "c": 3.0,
}


class TestParams:
    def test_parse(self):
        params = parse_params(MEANS_DOC)
        assert params == Parameters(
            lam=0.1089, mu=0.01089, k=1.179e-3, delta=0.3660, p=1427.0, c=3.0
        )

    def test_round_trip(self):
        params = parse_params(MEANS_DOC)
        assert parse_params(params_to_json(params)) == params

    def test_json_uses_lambda_key(self):
        doc = params_to_json(parse_params(MEANS_DOC))
        assert set(doc) == {"lambda", "mu", "k", "delta", "p", "c"}

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="beta"):
            parse_params({**MEANS_DOC, "beta": 1.0})

    def test_missing_key_rejected(self):
        doc = dict(MEANS_DOC)
        del doc["delta"]
        with pytest.raises(ConfigError, match="delta"):
            parse_params(doc)

    def test_bool_is_not_a_number(self):
        with pytest.raises(ConfigError):
            parse_params({**MEANS_DOC, "c": True})

    def test_invalid_value_keeps_path(self):
        with pytest.raises(ConfigError, match="params"):
            parse_params({**MEANS_DOC, "mu": -1.0})

    def test_non_mapping(self):
        with pytest.raises(ConfigError):
            parse_params([1, 2, 3])


class TestState:
    def test_round_trip(self):
        state = State(1000.0, 0.0, 0.001)
        assert parse_state(state_to_json(state)) == state

    def test_keys(self):
        assert state_to_json(State(1.0, 2.0, 3.0)) == {
            "t_cells": 1.0, "infected": 2.0, "virions": 3.0,
        }

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            parse_state({"t_cells": 1.0, "infected": 0.0, "virions": 0.0, "x": 1.0})


class TestIntegrator:
    def test_none_gives_defaults(self):
        assert parse_integrator(None) == IntegratorConfig()

    def test_partial_override(self):
        config = parse_integrator({"method": "fixed_rk4", "dt": 0.001})
        assert config.method is Method.FIXED_RK4
        assert config.dt == 0.001
        assert config.rel_tol == IntegratorConfig().rel_tol

    def test_round_trip(self):
        config = IntegratorConfig(
            method=Method.FIXED_RK4, dt=0.005, rel_tol=1e-9, abs_tol=1e-11,
            max_steps=123456, record_stride=7,
        )
        assert parse_integrator(integrator_to_json(config)) == config

    def test_bad_method(self):
        with pytest.raises(ConfigError, match="adaptive_rk45"):
            parse_integrator({"method": "euler"})

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="step"):
            parse_integrator({"step": 0.1})


class TestDistribution:
    @pytest.mark.parametrize("dist", [
        Constant(3.0),
        Uniform(1.9e-4, 4.8e-3),
        Triangular(0.13, 0.366, 0.8),
        TruncatedNormal(mean=0.1089, sd=0.03925, lo=0.043, hi=0.2),
    ])
    def test_round_trip(self, dist):
        assert parse_distribution(distribution_to_json(dist), "d") == dist

    def test_unknown_type(self):
        with pytest.raises(ConfigError, match="lognormal"):
            parse_distribution({"type": "lognormal", "mu": 0.0}, "d")

    def test_extra_field_for_type(self):
        with pytest.raises(ConfigError):
            parse_distribution({"type": "constant", "value": 1.0, "lo": 0.0}, "d")

    def test_validation_propagates_with_path(self):
        with pytest.raises(ConfigError, match="d"):
            parse_distribution({"type": "uniform", "lo": 2.0, "hi": 1.0}, "d")


class TestScenario:
    def test_builtin_names(self):
        assert parse_scenario("truncated_normal") == truncated_normal_scenario()
        assert parse_scenario("uniform_triangular") == uniform_triangular_scenario()

    def test_unknown_builtin(self):
        with pytest.raises(ConfigError, match="builtins"):
            parse_scenario("gaussian")

    @pytest.mark.parametrize("scenario", [
        truncated_normal_scenario(), uniform_triangular_scenario(),
    ])
    def test_round_trip(self, scenario):
        assert parse_scenario(scenario_to_json(scenario)) == scenario

    def test_base_only_keeps_name(self):
        scenario = parse_scenario({"base": "truncated_normal"})
        assert scenario == truncated_normal_scenario()

    def test_base_with_sd_override(self):
        narrow = {"type": "truncated_normal", "mean": 0.1089, "sd": 0.01,
                  "lo": 0.043, "hi": 0.2}
        scenario = parse_scenario({"base": "truncated_normal", "lambda": narrow})
        assert scenario.lam == TruncatedNormal(mean=0.1089, sd=0.01, lo=0.043, hi=0.2)
        assert scenario.mu == truncated_normal_scenario().mu  # untouched
        assert scenario.name == "truncated_normal_custom"

    def test_base_switching_to_independent_needs_lambda(self):
        with pytest.raises(ConfigError, match="lambda"):
            parse_scenario({"base": "uniform_triangular", "lambda_rule": "independent"})

    def test_full_object_without_base(self):
        doc = {
            "name": "pinned",
            "k": {"type": "constant", "value": 1e-3},
            "p": {"type": "constant", "value": 1000.0},
            "mu": {"type": "constant", "value": 0.01},
            "delta": {"type": "constant", "value": 0.4},
            "c": {"type": "constant", "value": 3.0},
            "lambda_rule": "ten_times_mu",
        }
        scenario = parse_scenario(doc)
        assert scenario.name == "pinned"
        assert scenario.lambda_rule is LambdaRule.TEN_TIMES_MU
        assert scenario.lam is None

    def test_missing_field_without_base(self):
        with pytest.raises(ConfigError, match="delta"):
            parse_scenario({
                "name": "x",
                "k": {"type": "constant", "value": 1e-3},
                "p": {"type": "constant", "value": 1000.0},
                "mu": {"type": "constant", "value": 0.01},
                "c": {"type": "constant", "value": 3.0},
                "lambda_rule": "ten_times_mu",
            })

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="sd"):
            parse_scenario({"base": "truncated_normal", "sd": 0.01})


class TestCriterion:
    def test_asymptotic_requires_null_horizon(self):
        assert parse_criterion(
            {"type": "asymptotic_r", "horizon_days": None, "threshold": None}
        ) == AsymptoticR()
        assert parse_criterion({"type": "asymptotic_r"}) == AsymptoticR()
        with pytest.raises(ConfigError, match="horizon_days"):
            parse_criterion({"type": "asymptotic_r", "horizon_days": 100.0})

    def test_finite_time_defaults(self):
        assert parse_criterion({"type": "finite_time"}) == FiniteTime(100.0, 50.0)

    def test_finite_time_custom(self):
        crit = parse_criterion(
            {"type": "finite_time", "horizon_days": 60.0, "threshold": 25.0}
        )
        assert crit == FiniteTime(horizon=60.0, threshold=25.0)

    @pytest.mark.parametrize("criterion", [AsymptoticR(), FiniteTime(60.0, 50.0)])
    def test_round_trip(self, criterion):
        assert parse_criterion(criterion_to_json(criterion)) == criterion

    def test_serialized_asymptotic_has_null_slots(self):
        assert criterion_to_json(AsymptoticR()) == {
            "type": "asymptotic_r", "horizon_days": None, "threshold": None,
        }


class TestInit:
    def test_none(self):
        assert parse_init(None) is None
        assert init_to_json(None) is None

    def test_state_round_trip(self):
        state = State(500.0, 0.0, 200.0)
        assert parse_init(init_to_json(state)) == state

    def test_grid_default_shorthand(self):
        assert parse_init({"grid": "default"}) == InitialConditionGrid.default()

    def test_grid_round_trip(self):
        grid = InitialConditionGrid(
            t0_values=(100.0, 200.0), v0_values=(50.0,), i0=1.0
        )
        assert parse_init(init_to_json(grid)) == grid

    def test_grid_rejects_empty_axis(self):
        with pytest.raises(ConfigError):
            parse_init({"grid": {"t0_values": [], "v0_values": [100.0]}})

    def test_grid_extra_sibling_key(self):
        with pytest.raises(ConfigError):
            parse_init({"grid": "default", "t_cells": 1.0})


class TestExperiment:
    def doc(self) -> dict:
        return {
            "scenario": "uniform_triangular",
            "criterion": {"type": "finite_time", "horizon_days": 60.0, "threshold": 50.0},
            "trials": 1000,
            "master_seed": 20260825,
            "init": {"grid": "default"},
            "integrator": None,
        }

    def test_parse(self):
        config = parse_experiment(self.doc())
        assert config.trials == 1000
        assert config.master_seed == 20260825
        assert config.criterion == FiniteTime(60.0, 50.0)
        assert config.init == InitialConditionGrid.default()
        assert config.integrator == IntegratorConfig()

    def test_round_trip(self):
        config = parse_experiment(self.doc())
        assert parse_experiment(experiment_to_json(config)) == config

    def test_missing_required(self):
        doc = self.doc()
        del doc["master_seed"]
        with pytest.raises(ConfigError, match="master_seed"):
            parse_experiment(doc)

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="seed"):
            parse_experiment({**self.doc(), "seed": 1})

    def test_json_serializable(self):
        json.dumps(experiment_to_json(parse_experiment(self.doc())))


class TestSimulation:
    def doc(self) -> dict:
        return {
            "params": dict(MEANS_DOC),
            "init": {"t_cells": 1000.0, "infected": 0.0, "virions": 0.001},
            "t_end": 100.0,
            "integrator": {"method": "adaptive_rk45"},
        }

    def test_parse(self):
        params, init, t_end, integrator = parse_simulation(self.doc())
        assert params.p == 1427.0
        assert init == State(1000.0, 0.0, 0.001)
        assert t_end == 100.0
        assert integrator.method is Method.ADAPTIVE_RK45

    def test_round_trip(self):
        parsed = parse_simulation(self.doc())
        assert parse_simulation(simulation_to_json(*parsed)) == parsed

    def test_missing_t_end(self):
        doc = self.doc()
        del doc["t_end"]
        with pytest.raises(ConfigError, match="t_end"):
            parse_simulation(doc)

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="duration"):
            parse_simulation({**self.doc(), "duration": 10.0})
